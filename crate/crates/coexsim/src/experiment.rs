//! Experiment orchestration: parallel trial execution, statistics, sweeps,
//! and mode comparisons.

use rayon::prelude::*;

use coexsim_core::spectrum::SharingMode;

use crate::config::{ConfigError, ScenarioConfig, TopologySpec};
use crate::trial::{run_trial, Prepared, TrialError, TrialResult};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trial(#[from] TrialError),
}

/// Mean, sample standard deviation, and normal-approximation 95% confidence
/// half-width (1.96 sigma / sqrt n).
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct Stats {
    pub n: u32,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        let n = values.len();
        if n == 0 {
            return Stats::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            var.sqrt()
        } else {
            0.0
        };
        Stats {
            n: n as u32,
            mean,
            std,
            ci95: 1.96 * std / (n as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ExperimentSummary {
    pub mode: SharingMode,
    pub trials: u32,
    pub master_seed: u64,
    pub admitted_total: Stats,
    pub admitted_cochannel: Stats,
    pub unserved_ues: Stats,
    pub mean_degradation: Stats,
    pub rejected_interference: Stats,
    pub rejected_degradation: Stats,
    pub rejected_mop_cap: Stats,
    pub rejected_no_spectrum: Stats,
}

pub struct Experiment {
    pub summary: ExperimentSummary,
    pub trials: Vec<TrialResult>,
}

/// Runs `config.trials` independent trials. Results are sorted by trial
/// index, so output is identical for any worker count.
pub fn run_experiment(config: &ScenarioConfig) -> Result<Experiment, ExperimentError> {
    let prepared = Prepared::new(config.clone())?;
    let mut trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(&prepared, i))
        .collect::<Result<_, _>>()?;
    trials.sort_by_key(|t| t.trial_index);
    Ok(Experiment {
        summary: summarize(config, &trials),
        trials,
    })
}

fn summarize(config: &ScenarioConfig, trials: &[TrialResult]) -> ExperimentSummary {
    let col = |f: &dyn Fn(&TrialResult) -> f64| {
        Stats::of(&trials.iter().map(f).collect::<Vec<f64>>())
    };
    ExperimentSummary {
        mode: config.mode,
        trials: trials.len() as u32,
        master_seed: config.master_seed,
        admitted_total: col(&|t| t.admitted_total as f64),
        admitted_cochannel: col(&|t| t.admitted_cochannel as f64),
        unserved_ues: col(&|t| t.unserved_ues as f64),
        mean_degradation: col(&|t| t.mean_degradation()),
        rejected_interference: col(&|t| t.rejections.interference as f64),
        rejected_degradation: col(&|t| t.rejections.degradation as f64),
        rejected_mop_cap: col(&|t| t.rejections.mop_cap as f64),
        rejected_no_spectrum: col(&|t| t.rejections.no_spectrum as f64),
    }
}

/// One tidy sweep-output row.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub mode: SharingMode,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
    /// Mean admitted count relative to `SharingMode::None` at the same
    /// parameter value (1.0 for the NONE rows themselves).
    pub ratio: f64,
}

fn rows_for_param(
    param: f64,
    runs: &[(SharingMode, Stats)],
) -> Vec<SweepRow> {
    let none_mean = runs
        .iter()
        .find(|(m, _)| *m == SharingMode::None)
        .map(|(_, s)| s.mean);
    runs.iter()
        .map(|(mode, s)| SweepRow {
            param,
            mode: *mode,
            mean: s.mean,
            std: s.std,
            ci95: s.ci95,
            ratio: match none_mean {
                Some(base) if base > 0.0 => s.mean / base,
                _ => 1.0,
            },
        })
        .collect()
}

/// One experiment per (tolerance, mode) on shared seeds.
pub fn sweep_tolerance(
    config: &ScenarioConfig,
    tolerances: &[f64],
    modes: &[SharingMode],
) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut rows = Vec::new();
    for &tol in tolerances {
        let mut runs = Vec::new();
        for &mode in modes {
            let mut cfg = config.clone();
            cfg.mode = mode;
            cfg.policy.degradation_tolerance = tol;
            let exp = run_experiment(&cfg)?;
            runs.push((mode, exp.summary.admitted_total));
        }
        rows.extend(rows_for_param(tol, &runs));
    }
    Ok(rows)
}

/// One experiment per (inter-site distance, mode). Hex topologies only.
pub fn sweep_density(
    config: &ScenarioConfig,
    isds_m: &[f64],
    modes: &[SharingMode],
) -> Result<Vec<SweepRow>, ExperimentError> {
    let TopologySpec::Hex {
        rings, assignment, ..
    } = config.topology
    else {
        return Err(ConfigError::Invalid(
            "sweep-density requires a hex topology".into(),
        )
        .into());
    };
    let mut rows = Vec::new();
    for &isd in isds_m {
        let mut runs = Vec::new();
        for &mode in modes {
            let mut cfg = config.clone();
            cfg.mode = mode;
            cfg.topology = TopologySpec::Hex {
                rings,
                isd_m: isd,
                assignment,
            };
            let exp = run_experiment(&cfg)?;
            runs.push((mode, exp.summary.admitted_total));
        }
        rows.extend(rows_for_param(isd, &runs));
    }
    Ok(rows)
}

/// Paired per-seed admitted counts across sharing modes. Placements are
/// identical across modes for each seed (same seed streams), isolating the
/// sharing effect.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ModeComparison {
    pub modes: Vec<SharingMode>,
    /// `counts[k][i]` = admitted_total for modes[k] on trial i.
    pub counts: Vec<Vec<u32>>,
    pub means: Vec<f64>,
    /// means[k] / means[0] with modes[0] = NONE.
    pub ratios: Vec<f64>,
}

pub fn compare_modes(
    config: &ScenarioConfig,
    modes: &[SharingMode],
) -> Result<ModeComparison, ExperimentError> {
    let mut counts = Vec::new();
    for &mode in modes {
        let mut cfg = config.clone();
        cfg.mode = mode;
        let exp = run_experiment(&cfg)?;
        counts.push(exp.trials.iter().map(|t| t.admitted_total).collect::<Vec<u32>>());
    }
    let means: Vec<f64> = counts
        .iter()
        .map(|c| c.iter().map(|v| *v as f64).sum::<f64>() / c.len().max(1) as f64)
        .collect();
    let base = means.first().copied().unwrap_or(0.0);
    let ratios = means
        .iter()
        .map(|m| if base > 0.0 { m / base } else { 1.0 })
        .collect();
    Ok(ModeComparison {
        modes: modes.to_vec(),
        counts,
        means,
        ratios,
    })
}
