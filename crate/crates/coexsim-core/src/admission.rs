//! Decides which IoT candidates may transmit concurrently with UEs.
//!
//! Two constraints gate every admission, both evaluated against the UEs
//! whose channel overlaps the candidate's: the aggregate IoT interference at
//! the UE's serving BS must stay at or below the tolerable threshold
//! (inclusive), and the UE's Shannon-throughput degradation must stay within
//! the configured tolerance. In leasing mode the lessor's UEs are protected
//! by a separate (typically tighter) cap.
//!
//! `greedy_admit` is the production path; `exhaustive_admit` is a
//! small-instance brute-force oracle over the same predicate; `audit`
//! recomputes everything from scratch, independent of the incremental
//! caches.

use alloc::vec::Vec;

use rand::RngCore;

use crate::geom::Position;
use crate::radio::{
    dbm_to_mw, mw_to_dbm_or_sentinel, shadowing_db, sinr_linear, throughput_bps, Channel,
    PropagationModel,
};
use crate::spectrum::draw_iot_channel;
use crate::topology::{shuffled_indices, BsId, DeviceId, OperatorId};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Uplink link budget with optional seeded log-normal shadowing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkModel {
    pub propagation: PropagationModel,
    pub shadowing: Option<Shadowing>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Shadowing {
    pub sigma_db: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl LinkModel {
    pub fn new(propagation: PropagationModel) -> Self {
        LinkModel {
            propagation,
            shadowing: None,
        }
    }

    /// Received power of `(tx_id -> bs_id)` over `distance_m`. Shadowing,
    /// when enabled, is a deterministic function of the link endpoints.
    pub fn rx_power_dbm(&self, tx_dbm: f64, tx_id: DeviceId, bs_id: BsId, distance_m: f64) -> f64 {
        let mut rx = self.propagation.rx_power_dbm(tx_dbm, distance_m);
        if let Some(sh) = &self.shadowing {
            rx -= shadowing_db(sh.sigma_db, sh.seed, tx_id.0 as u64, bs_id.0 as u64);
        }
        rx
    }
}

/// A served UE as a potential interference victim.
#[derive(Clone, Debug, PartialEq)]
pub struct UeVictim {
    pub device_id: DeviceId,
    pub operator_id: OperatorId,
    pub serving_bs: BsId,
    pub bs_position: Position,
    pub channel: Channel,
    pub signal_dbm: f64,
    pub noise_dbm: f64,
    /// Inter-cell co-channel UE interference, mW. Zero unless the harness
    /// enables the UE inter-cell interference flag. Part of the baseline.
    pub static_interference_mw: f64,
    pub baseline_bps: f64,
}

impl UeVictim {
    /// Throughput with zero IoT interference (the degradation reference).
    pub fn baseline_throughput(
        channel: &Channel,
        signal_dbm: f64,
        noise_dbm: f64,
        static_interference_mw: f64,
    ) -> f64 {
        let interference_dbm = mw_to_dbm_or_sentinel(static_interference_mw);
        let sinr = sinr_linear(signal_dbm, interference_dbm, noise_dbm);
        throughput_bps(channel.bandwidth_hz(), sinr)
    }

    pub fn new(
        device_id: DeviceId,
        operator_id: OperatorId,
        serving_bs: BsId,
        bs_position: Position,
        channel: Channel,
        signal_dbm: f64,
        noise_dbm: f64,
        static_interference_mw: f64,
    ) -> Self {
        let baseline_bps =
            Self::baseline_throughput(&channel, signal_dbm, noise_dbm, static_interference_mw);
        UeVictim {
            device_id,
            operator_id,
            serving_bs,
            bs_position,
            channel,
            signal_dbm,
            noise_dbm,
            static_interference_mw,
            baseline_bps,
        }
    }

    /// Throughput under the given aggregate IoT interference (mW).
    pub fn throughput_bps(&self, iot_interference_mw: f64) -> f64 {
        let total_mw = self.static_interference_mw + iot_interference_mw;
        let sinr = sinr_linear(self.signal_dbm, mw_to_dbm_or_sentinel(total_mw), self.noise_dbm);
        throughput_bps(self.channel.bandwidth_hz(), sinr)
    }

    /// `(baseline - current) / baseline`, zero for a zero baseline.
    pub fn degradation(&self, iot_interference_mw: f64) -> f64 {
        if self.baseline_bps > 0.0 {
            (self.baseline_bps - self.throughput_bps(iot_interference_mw)) / self.baseline_bps
        } else {
            0.0
        }
    }
}

/// An IoT device seeking admission.
#[derive(Clone, Debug, PartialEq)]
pub struct IotCandidate {
    pub device_id: DeviceId,
    pub operator_id: OperatorId,
    pub position: Position,
    pub tx_power_dbm: f64,
    /// Index into the caller's eligible-channel-set table.
    pub eligible_set: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmittedIot {
    pub device_id: DeviceId,
    pub operator_id: OperatorId,
    pub position: Position,
    pub tx_power_dbm: f64,
    pub channel: Channel,
}

/// Running admission state for one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct CoexistenceState {
    pub ues: Vec<UeVictim>,
    /// Per-UE aggregate IoT interference at the serving BS, mW (incremental
    /// cache; `audit` verifies it against a from-scratch recomputation).
    pub iot_interference_mw: Vec<f64>,
    pub admitted: Vec<AdmittedIot>,
}

impl CoexistenceState {
    pub fn new(ues: Vec<UeVictim>) -> Self {
        let n = ues.len();
        CoexistenceState {
            ues,
            iot_interference_mw: alloc::vec![0.0; n],
            admitted: Vec::new(),
        }
    }

    pub fn ue_degradation(&self, ue_idx: usize) -> f64 {
        self.ues[ue_idx].degradation(self.iot_interference_mw[ue_idx])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MopRule {
    pub operator: OperatorId,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissionPolicy {
    pub interference_threshold_dbm: f64,
    pub degradation_tolerance: f64,
    pub channel_retries: u32,
    pub enforce_threshold: bool,
    pub enforce_degradation: bool,
    /// Leasing-mode protection of the lessor's UEs.
    pub mop: Option<MopRule>,
}

impl Default for AdmissionPolicy {
    fn default() -> Self {
        AdmissionPolicy {
            interference_threshold_dbm: -62.0,
            degradation_tolerance: 0.1,
            channel_retries: 1,
            enforce_threshold: true,
            enforce_degradation: true,
            mop: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Interference,
    Degradation,
    MopCap,
    /// Audit only: incremental cache drifted from the recomputation.
    CacheDrift,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub ue: DeviceId,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decision {
    Admit,
    Reject(Violation),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RejectionHistogram {
    pub interference: u32,
    pub degradation: u32,
    pub mop_cap: u32,
    pub no_spectrum: u32,
}

impl RejectionHistogram {
    pub fn total(&self) -> u32 {
        self.interference + self.degradation + self.mop_cap + self.no_spectrum
    }

    fn record(&mut self, kind: ViolationKind) {
        match kind {
            ViolationKind::Interference => self.interference += 1,
            ViolationKind::Degradation => self.degradation += 1,
            ViolationKind::MopCap => self.mop_cap += 1,
            ViolationKind::CacheDrift => {}
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AdmissionResult {
    pub admitted_total: u32,
    /// Admitted devices whose channel overlaps at least one served UE.
    pub admitted_cochannel: u32,
    pub rejections: RejectionHistogram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmissionError {
    /// Instance exceeds the exhaustive-search guard limits.
    InstanceTooLarge,
}

impl core::fmt::Display for AdmissionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AdmissionError::InstanceTooLarge => {
                write!(f, "instance exceeds exhaustive-search limits (12 candidates, 4 channels)")
            }
        }
    }
}

impl core::error::Error for AdmissionError {}

/// The candidate's interference contribution to each overlapping UE, mW.
fn contributions(
    candidate: &IotCandidate,
    channel: &Channel,
    state: &CoexistenceState,
    link: &LinkModel,
) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (i, ue) in state.ues.iter().enumerate() {
        let frac = channel.overlap_fraction(&ue.channel);
        if frac > 0.0 {
            let d = candidate.position.distance_m(&ue.bs_position);
            let rx = link.rx_power_dbm(candidate.tx_power_dbm, candidate.device_id, ue.serving_bs, d);
            out.push((i, dbm_to_mw(rx) * frac));
        }
    }
    out
}

fn check_against(
    contribs: &[(usize, f64)],
    state: &CoexistenceState,
    policy: &AdmissionPolicy,
) -> Decision {
    let threshold_mw = dbm_to_mw(policy.interference_threshold_dbm);
    for (i, add_mw) in contribs {
        let ue = &state.ues[*i];
        let new_mw = state.iot_interference_mw[*i] + add_mw;
        if policy.enforce_threshold && new_mw > threshold_mw {
            return Decision::Reject(Violation {
                kind: ViolationKind::Interference,
                ue: ue.device_id,
            });
        }
        let degradation = ue.degradation(new_mw);
        if policy.enforce_degradation && degradation > policy.degradation_tolerance {
            return Decision::Reject(Violation {
                kind: ViolationKind::Degradation,
                ue: ue.device_id,
            });
        }
        if let Some(rule) = &policy.mop {
            if ue.operator_id == rule.operator && degradation > rule.tolerance {
                return Decision::Reject(Violation {
                    kind: ViolationKind::MopCap,
                    ue: ue.device_id,
                });
            }
        }
    }
    Decision::Admit
}

/// Would admitting `candidate` on `channel` keep every overlapped UE within
/// the policy? Does not mutate the state.
pub fn check_candidate(
    candidate: &IotCandidate,
    channel: &Channel,
    state: &CoexistenceState,
    policy: &AdmissionPolicy,
    link: &LinkModel,
) -> Decision {
    let contribs = contributions(candidate, channel, state, link);
    check_against(&contribs, state, policy)
}

fn commit(
    candidate: &IotCandidate,
    channel: Channel,
    contribs: &[(usize, f64)],
    state: &mut CoexistenceState,
) {
    for (i, add_mw) in contribs {
        state.iot_interference_mw[*i] += add_mw;
    }
    state.admitted.push(AdmittedIot {
        device_id: candidate.device_id,
        operator_id: candidate.operator_id,
        position: candidate.position,
        tx_power_dbm: candidate.tx_power_dbm,
        channel,
    });
}

/// Greedy admission: candidates in seeded-shuffled order, each drawing up to
/// `channel_retries` random eligible channels and admitted on the first
/// passing check. Rejections are permanent within a trial.
pub fn greedy_admit(
    candidates: &[IotCandidate],
    eligible_sets: &[Vec<Channel>],
    state: &mut CoexistenceState,
    policy: &AdmissionPolicy,
    link: &LinkModel,
    rng: &mut impl RngCore,
) -> AdmissionResult {
    let order = shuffled_indices(candidates.len(), rng.next_u64());
    let mut result = AdmissionResult::default();
    for idx in order {
        let cand = &candidates[idx];
        let eligible = &eligible_sets[cand.eligible_set];
        if eligible.is_empty() {
            result.rejections.no_spectrum += 1;
            continue;
        }
        let retries = policy.channel_retries.max(1);
        let mut last_violation = None;
        let mut admitted = false;
        for _ in 0..retries {
            let channel = draw_iot_channel(eligible, rng).expect("non-empty eligible list");
            let contribs = contributions(cand, &channel, state, link);
            match check_against(&contribs, state, policy) {
                Decision::Admit => {
                    let cochannel = !contribs.is_empty();
                    commit(cand, channel, &contribs, state);
                    result.admitted_total += 1;
                    if cochannel {
                        result.admitted_cochannel += 1;
                    }
                    admitted = true;
                    break;
                }
                Decision::Reject(v) => last_violation = Some(v),
            }
        }
        if !admitted {
            if let Some(v) = last_violation {
                result.rejections.record(v.kind);
            }
        }
    }
    result
}

const EXHAUSTIVE_MAX_CANDIDATES: usize = 12;
const EXHAUSTIVE_MAX_CHANNELS: usize = 4;

/// Brute-force optimum over all subset x channel-assignment combinations,
/// under the same predicate as `check_candidate`. Guarded against blowup.
///
/// Returns the maximum feasible count and one witness assignment (parallel
/// to `candidates`; `None` marks devices left out).
pub fn exhaustive_admit(
    candidates: &[IotCandidate],
    eligible_sets: &[Vec<Channel>],
    state0: &CoexistenceState,
    policy: &AdmissionPolicy,
    link: &LinkModel,
) -> Result<(u32, Vec<Option<Channel>>), AdmissionError> {
    if candidates.len() > EXHAUSTIVE_MAX_CANDIDATES
        || candidates
            .iter()
            .any(|c| eligible_sets[c.eligible_set].len() > EXHAUSTIVE_MAX_CHANNELS)
    {
        return Err(AdmissionError::InstanceTooLarge);
    }
    let mut state = state0.clone();
    let mut assignment: Vec<Option<Channel>> = alloc::vec![None; candidates.len()];
    let mut best_count = 0u32;
    let mut best_assignment = assignment.clone();
    dfs(
        candidates,
        eligible_sets,
        policy,
        link,
        &mut state,
        &mut assignment,
        0,
        0,
        &mut best_count,
        &mut best_assignment,
    );
    Ok((best_count, best_assignment))
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    candidates: &[IotCandidate],
    eligible_sets: &[Vec<Channel>],
    policy: &AdmissionPolicy,
    link: &LinkModel,
    state: &mut CoexistenceState,
    assignment: &mut Vec<Option<Channel>>,
    i: usize,
    count: u32,
    best_count: &mut u32,
    best_assignment: &mut Vec<Option<Channel>>,
) {
    if count > *best_count {
        *best_count = count;
        *best_assignment = assignment.clone();
    }
    if i == candidates.len() {
        return;
    }
    // Bound: even admitting everything left cannot beat the best.
    if count + (candidates.len() - i) as u32 <= *best_count {
        return;
    }
    let cand = &candidates[i];
    for channel in &eligible_sets[cand.eligible_set] {
        let contribs = contributions(cand, channel, state, link);
        if let Decision::Admit = check_against(&contribs, state, policy) {
            commit(cand, *channel, &contribs, state);
            assignment[i] = Some(*channel);
            dfs(
                candidates,
                eligible_sets,
                policy,
                link,
                state,
                assignment,
                i + 1,
                count + 1,
                best_count,
                best_assignment,
            );
            assignment[i] = None;
            state.admitted.pop();
            for (u, add_mw) in &contribs {
                state.iot_interference_mw[*u] -= add_mw;
            }
        }
    }
    dfs(
        candidates,
        eligible_sets,
        policy,
        link,
        state,
        assignment,
        i + 1,
        count,
        best_count,
        best_assignment,
    );
}

const CACHE_TOLERANCE_DB: f64 = 1e-9;

/// Post-hoc invariant check: recomputes every UE's aggregate IoT
/// interference from the admitted list, verifies the incremental cache, and
/// re-evaluates all constraints. Empty result means pass.
pub fn audit(state: &CoexistenceState, policy: &AdmissionPolicy, link: &LinkModel) -> Vec<Violation> {
    let mut violations = Vec::new();
    let threshold_mw = dbm_to_mw(policy.interference_threshold_dbm);
    for (i, ue) in state.ues.iter().enumerate() {
        let mut recomputed_mw = 0.0;
        for iot in &state.admitted {
            let frac = iot.channel.overlap_fraction(&ue.channel);
            if frac > 0.0 {
                let d = iot.position.distance_m(&ue.bs_position);
                let rx = link.rx_power_dbm(iot.tx_power_dbm, iot.device_id, ue.serving_bs, d);
                recomputed_mw += dbm_to_mw(rx) * frac;
            }
        }
        let cached_mw = state.iot_interference_mw[i];
        let cache_ok = if recomputed_mw == 0.0 || cached_mw == 0.0 {
            recomputed_mw == cached_mw
        } else {
            let drift_db = 10.0 * libm::fabs(libm::log10(cached_mw / recomputed_mw));
            drift_db <= CACHE_TOLERANCE_DB
        };
        if !cache_ok {
            violations.push(Violation {
                kind: ViolationKind::CacheDrift,
                ue: ue.device_id,
            });
        }
        if policy.enforce_threshold && recomputed_mw > threshold_mw {
            violations.push(Violation {
                kind: ViolationKind::Interference,
                ue: ue.device_id,
            });
        }
        let degradation = ue.degradation(recomputed_mw);
        if policy.enforce_degradation && degradation > policy.degradation_tolerance {
            violations.push(Violation {
                kind: ViolationKind::Degradation,
                ue: ue.device_id,
            });
        }
        if let Some(rule) = &policy.mop {
            if ue.operator_id == rule.operator && degradation > rule.tolerance {
                violations.push(Violation {
                    kind: ViolationKind::MopCap,
                    ue: ue.device_id,
                });
            }
        }
    }
    violations
}
