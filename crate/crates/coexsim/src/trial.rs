//! Builds and runs one Monte Carlo trial end to end.

use std::collections::HashMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use coexsim_core::admission::{
    audit, greedy_admit, CoexistenceState, IotCandidate, LinkModel, RejectionHistogram, UeVictim,
};
use coexsim_core::radio::{dbm_to_mw, Channel};
use coexsim_core::seed::{self, stream};
use coexsim_core::spectrum::{assign_ue_channels, build_plan, SpectrumPlan};
use coexsim_core::topology::{
    associate, gen_hex_grid, gen_uniform, place_devices, Device, DeviceKind, DevicePowerProfile,
    Topology,
};
use coexsim_core::{BsId, OperatorId};

use crate::config::{ScenarioConfig, TopologySpec};

#[derive(Debug, thiserror::Error)]
pub enum TrialError {
    #[error("trial {trial}: topology: {msg}")]
    Topology { trial: u32, msg: String },
    #[error("trial {trial}: spectrum: {msg}")]
    Spectrum { trial: u32, msg: String },
    #[error("trial {trial}: audit found {count} constraint violation(s); first: {first}")]
    Audit {
        trial: u32,
        count: usize,
        first: String,
    },
    #[error("csv topology: {0}")]
    BsCsv(#[from] crate::bscsv::BsCsvError),
}

/// Outcome of one trial. `runtime_ms` is diagnostic only and excluded from
/// file outputs so that identical seeds produce identical bytes.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub trial_index: u32,
    pub seed: u64,
    pub admitted_total: u32,
    pub admitted_cochannel: u32,
    pub rejections: RejectionHistogram,
    pub served_ues: u32,
    pub unserved_ues: u32,
    pub ue_degradations: Vec<f64>,
    pub runtime_ms: f64,
}

impl TrialResult {
    pub fn mean_degradation(&self) -> f64 {
        if self.ue_degradations.is_empty() {
            0.0
        } else {
            self.ue_degradations.iter().sum::<f64>() / self.ue_degradations.len() as f64
        }
    }

    pub fn max_degradation(&self) -> f64 {
        self.ue_degradations.iter().cloned().fold(0.0, f64::max)
    }
}

/// Scenario pieces shared across trials: the resolved operator set and, for
/// the deterministic generators, the fixed topology.
pub struct Prepared {
    pub config: ScenarioConfig,
    pub operators: Vec<coexsim_core::spectrum::Operator>,
    pub fixed_topology: Option<Topology>,
}

impl Prepared {
    pub fn new(config: ScenarioConfig) -> Result<Self, crate::config::ConfigError> {
        config.validate()?;
        let operators = config.operators()?;
        let fixed_topology = match &config.topology {
            TopologySpec::Hex {
                rings,
                isd_m,
                assignment,
            } => {
                let ids: Vec<OperatorId> = operators.iter().map(|o| o.id).collect();
                Some(
                    gen_hex_grid(*rings, *isd_m, &ids, *assignment)
                        .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?,
                )
            }
            TopologySpec::Csv { path } => Some(
                crate::bscsv::load_bs_csv(std::path::Path::new(path))
                    .map_err(|e| crate::config::ConfigError::Invalid(e.to_string()))?,
            ),
            TopologySpec::Uniform { .. } => None,
        };
        Ok(Prepared {
            config,
            operators,
            fixed_topology,
        })
    }
}

fn topology_for_trial(prepared: &Prepared, trial_seed: u64) -> Result<Topology, String> {
    if let Some(t) = &prepared.fixed_topology {
        return Ok(t.clone());
    }
    match &prepared.config.topology {
        TopologySpec::Uniform {
            area,
            count_per_operator,
        } => {
            let ids: Vec<OperatorId> = prepared.operators.iter().map(|o| o.id).collect();
            gen_uniform(
                area.to_rect(),
                *count_per_operator,
                &ids,
                seed::derive(trial_seed, stream::TOPOLOGY),
            )
            .map_err(|e| e.to_string())
        }
        _ => unreachable!("fixed topologies are pre-built"),
    }
}

/// Eligible IoT channel sets, one per (operator, serving-BS-shared) pair.
struct EligibleTable {
    sets: Vec<Vec<Channel>>,
    index: HashMap<(OperatorId, bool), usize>,
}

impl EligibleTable {
    fn build(plan: &SpectrumPlan, pool_at_shared_only: bool) -> Result<Self, String> {
        let mut sets = Vec::new();
        let mut index = HashMap::new();
        for op in &plan.operators {
            for shared in [false, true] {
                let list = plan
                    .iot_channels(op.id, shared, pool_at_shared_only)
                    .map_err(|e| e.to_string())?;
                index.insert((op.id, shared), sets.len());
                sets.push(list);
            }
        }
        Ok(EligibleTable { sets, index })
    }
}

pub fn run_trial(prepared: &Prepared, trial_index: u32) -> Result<TrialResult, TrialError> {
    let start = Instant::now();
    let cfg = &prepared.config;
    let trial_seed = seed::derive(cfg.master_seed, trial_index as u64);
    let topo_err = |msg: String| TrialError::Topology {
        trial: trial_index,
        msg,
    };
    let spec_err = |msg: String| TrialError::Spectrum {
        trial: trial_index,
        msg,
    };

    let topology = topology_for_trial(prepared, trial_seed).map_err(topo_err)?;
    let profile = DevicePowerProfile {
        ue_tx_power_dbm: cfg.ue_tx_power_dbm,
        iot_tx_power_dbm: cfg.iot_tx_power_dbm,
    };
    let devices = place_devices(
        &topology,
        cfg.ues_per_cell,
        cfg.iot_candidates_per_cell,
        &profile,
        cfg.device_operator_policy,
        seed::derive(trial_seed, stream::PLACEMENT),
    )
    .map_err(|e| topo_err(e.to_string()))?;

    let association = cfg.association.resolve(cfg.mode);
    let plan = build_plan(
        &prepared.operators,
        cfg.mode,
        cfg.ue_channel_width_hz,
        cfg.iot_channel_width_hz,
    )
    .map_err(|e| spec_err(e.to_string()))?;

    let link = LinkModel {
        propagation: cfg.propagation.to_model().expect("validated"),
        shadowing: cfg.shadowing(seed::derive(trial_seed, stream::SHADOWING)),
    };
    let noise = cfg.noise.to_model();

    // Associate every device; split into UEs and IoT candidates.
    let mut ue_devices: Vec<(Device, BsId, bool)> = Vec::new();
    let mut iot_devices: Vec<(Device, bool)> = Vec::new();
    for device in devices {
        let bs = associate(&device, &topology, association).map_err(|e| topo_err(e.to_string()))?;
        match device.kind {
            DeviceKind::Ue => ue_devices.push((device, bs.id, bs.shared)),
            DeviceKind::Iot => iot_devices.push((device, bs.shared)),
        }
    }

    // UE channel grants.
    let ue_keys: Vec<(BsId, OperatorId, bool)> = ue_devices
        .iter()
        .map(|(d, bs, shared)| (*bs, d.operator_id, *shared))
        .collect();
    let grants = assign_ue_channels(
        &plan,
        &ue_keys,
        cfg.pool_at_shared_bs_only,
        seed::derive(trial_seed, stream::UE_CHANNELS),
    )
    .map_err(|e| spec_err(e.to_string()))?;

    // Victim list for served UEs.
    let mut victims: Vec<UeVictim> = Vec::with_capacity(grants.served.len());
    for (ue_idx, channel) in &grants.served {
        let (device, bs_id, _) = &ue_devices[*ue_idx];
        let bs = topology.bs(*bs_id).expect("associated BS exists");
        let d = device.position.distance_m(&bs.position);
        let signal_dbm = link.rx_power_dbm(device.tx_power_dbm, device.id, *bs_id, d);
        victims.push(UeVictim::new(
            device.id,
            device.operator_id,
            *bs_id,
            bs.position,
            *channel,
            signal_dbm,
            noise.noise_dbm(channel.bandwidth_hz()),
            0.0,
        ));
    }
    if cfg.ue_intercell_interference {
        // Static inter-cell UE-on-UE interference, folded into baselines.
        let sources: Vec<(usize, &UeVictim)> = victims.iter().enumerate().collect();
        let mut static_mw = vec![0.0; victims.len()];
        for (i, victim) in &sources {
            for (j, other) in &sources {
                if i == j || victim.serving_bs == other.serving_bs {
                    continue;
                }
                let frac = other.channel.overlap_fraction(&victim.channel);
                if frac > 0.0 {
                    let (src_dev, _, _) = &ue_devices[grants.served[*j].0];
                    let d = src_dev.position.distance_m(&victim.bs_position);
                    let rx = link.rx_power_dbm(src_dev.tx_power_dbm, src_dev.id, victim.serving_bs, d);
                    static_mw[*i] += dbm_to_mw(rx) * frac;
                }
            }
        }
        for (victim, mw) in victims.iter_mut().zip(static_mw) {
            *victim = UeVictim::new(
                victim.device_id,
                victim.operator_id,
                victim.serving_bs,
                victim.bs_position,
                victim.channel,
                victim.signal_dbm,
                victim.noise_dbm,
                mw,
            );
        }
    }

    // IoT candidates with their eligible channel sets.
    let table =
        EligibleTable::build(&plan, cfg.pool_at_shared_bs_only).map_err(spec_err)?;
    let candidates: Vec<IotCandidate> = iot_devices
        .iter()
        .map(|(device, bs_shared)| IotCandidate {
            device_id: device.id,
            operator_id: device.operator_id,
            position: device.position,
            tx_power_dbm: device.tx_power_dbm,
            eligible_set: table.index[&(device.operator_id, *bs_shared)],
        })
        .collect();

    let mut state = CoexistenceState::new(victims);
    let policy = prepared.config.admission_policy();
    let mut rng = ChaCha12Rng::seed_from_u64(seed::derive(trial_seed, stream::ADMISSION));
    let outcome = greedy_admit(&candidates, &table.sets, &mut state, &policy, &link, &mut rng);

    let violations = audit(&state, &policy, &link);
    if !violations.is_empty() {
        return Err(TrialError::Audit {
            trial: trial_index,
            count: violations.len(),
            first: format!("{:?}", violations[0]),
        });
    }

    let ue_degradations: Vec<f64> = (0..state.ues.len()).map(|i| state.ue_degradation(i)).collect();
    Ok(TrialResult {
        trial_index,
        seed: trial_seed,
        admitted_total: outcome.admitted_total,
        admitted_cochannel: outcome.admitted_cochannel,
        rejections: outcome.rejections,
        served_ues: grants.served.len() as u32,
        unserved_ues: grants.unserved.len() as u32,
        ue_degradations,
        runtime_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}
