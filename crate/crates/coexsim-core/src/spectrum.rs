//! Operator band ownership, the exclusive/shared split, channelization, the
//! three sharing modes, the pool partition rule, and the 3GPP Release 13 IoT
//! radio profile catalog.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::radio::Channel;
use crate::topology::{BsId, OperatorId};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumError {
    /// LEASING requires exactly one operator flagged as MOP.
    MopCount(usize),
    MopOutsideLeasing,
    InvalidSharedFraction(f64),
    InvalidChannelWidth,
    UnknownOperator(OperatorId),
    /// `partition_pool` contributions not summing to the pool size (+-1 Hz).
    ContributionMismatch,
    NegativeRequest,
    /// A device with an empty eligible IoT channel list.
    NoSpectrum,
    UnknownProfile,
    DuplicateOperator(OperatorId),
}

impl core::fmt::Display for SpectrumError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpectrumError::MopCount(n) => {
                write!(f, "leasing mode requires exactly one MOP, found {n}")
            }
            SpectrumError::MopOutsideLeasing => {
                write!(f, "is_mop is only meaningful in leasing mode")
            }
            SpectrumError::InvalidSharedFraction(v) => {
                write!(f, "shared_fraction must be in [0, 1], got {v}")
            }
            SpectrumError::InvalidChannelWidth => write!(f, "channel width must be > 0"),
            SpectrumError::UnknownOperator(id) => write!(f, "unknown operator {}", id.0),
            SpectrumError::ContributionMismatch => {
                write!(f, "contributions must sum to the pool size within 1 Hz")
            }
            SpectrumError::NegativeRequest => write!(f, "requests must be >= 0"),
            SpectrumError::NoSpectrum => write!(f, "no eligible channel for device"),
            SpectrumError::UnknownProfile => write!(f, "unknown IoT profile name"),
            SpectrumError::DuplicateOperator(id) => write!(f, "duplicate operator id {}", id.0),
        }
    }
}

impl core::error::Error for SpectrumError {}

/// An operator's licensed block and how much of it is contributed to the
/// shared arrangement. The shared part is carved from the top of the band at
/// a single cut frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Operator {
    pub id: OperatorId,
    pub licensed_band: Channel,
    pub shared_fraction: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub is_mop: bool,
}

impl Operator {
    pub fn cut_hz(&self) -> f64 {
        self.licensed_band.high_hz - self.shared_fraction * self.licensed_band.bandwidth_hz()
    }

    /// Bottom part of the band, reserved for exclusive use. `None` when the
    /// whole band is contributed.
    pub fn exclusive_part(&self) -> Option<Channel> {
        Channel::new(self.licensed_band.low_hz, self.cut_hz()).ok()
    }

    /// Top part of the band, contributed to the shared arrangement.
    pub fn shared_part(&self) -> Option<Channel> {
        Channel::new(self.cut_hz(), self.licensed_band.high_hz).ok()
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if !(0.0..=1.0).contains(&self.shared_fraction) || !self.shared_fraction.is_finite() {
            return Err(SpectrumError::InvalidSharedFraction(self.shared_fraction));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum SharingMode {
    None,
    Pooling,
    Leasing,
}

impl core::fmt::Display for SharingMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SharingMode::None => write!(f, "none"),
            SharingMode::Pooling => write!(f, "pooling"),
            SharingMode::Leasing => write!(f, "leasing"),
        }
    }
}

/// Non-overlapping `width`-wide channels from the band's low edge; any
/// remainder spectrum is left unused.
pub fn channelize(band: &Channel, width_hz: f64) -> Vec<Channel> {
    assert!(width_hz > 0.0, "channel width must be > 0");
    let n = libm::floor(band.bandwidth_hz() / width_hz) as usize;
    (0..n)
        .map(|i| Channel {
            low_hz: band.low_hz + i as f64 * width_hz,
            high_hz: band.low_hz + (i + 1) as f64 * width_hz,
        })
        .collect()
}

/// Per-operator channel lists for one sharing mode.
///
/// `pool_*` lists are populated in POOLING mode (union of all shared parts),
/// `leased_*` in LEASING mode (the MOP's shared part). Private lists always
/// hold what the operator may use without touching the shared arrangement.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPlan {
    pub mode: SharingMode,
    pub operators: Vec<Operator>,
    pub private_ue: Vec<Vec<Channel>>,
    pub private_iot: Vec<Vec<Channel>>,
    pub pool_ue: Vec<Channel>,
    pub pool_iot: Vec<Channel>,
    pub leased_ue: Vec<Channel>,
    pub leased_iot: Vec<Channel>,
    pub mop: Option<OperatorId>,
}

impl SpectrumPlan {
    pub fn operator_index(&self, id: OperatorId) -> Result<usize, SpectrumError> {
        self.operators
            .iter()
            .position(|o| o.id == id)
            .ok_or(SpectrumError::UnknownOperator(id))
    }

    /// UE channels an operator may assign in a cell whose BS has the given
    /// shared-RAN membership.
    pub fn ue_channels(
        &self,
        op: OperatorId,
        bs_shared: bool,
        pool_at_shared_only: bool,
    ) -> Result<Vec<Channel>, SpectrumError> {
        let i = self.operator_index(op)?;
        let mut out = self.private_ue[i].clone();
        match self.mode {
            SharingMode::None => {}
            SharingMode::Pooling => {
                if bs_shared || !pool_at_shared_only {
                    out.extend_from_slice(&self.pool_ue);
                }
            }
            SharingMode::Leasing => {
                // Leased UE channels are reserved for the MOP's own traffic;
                // POPs offload only IoT onto the leased spectrum.
                if self.mop == Some(op) && (bs_shared || !pool_at_shared_only) {
                    out.extend_from_slice(&self.leased_ue);
                }
            }
        }
        Ok(out)
    }

    /// IoT channels a device of `op` may draw from, given its serving BS's
    /// shared-RAN membership.
    pub fn iot_channels(
        &self,
        op: OperatorId,
        bs_shared: bool,
        pool_at_shared_only: bool,
    ) -> Result<Vec<Channel>, SpectrumError> {
        let i = self.operator_index(op)?;
        let mut out = self.private_iot[i].clone();
        match self.mode {
            SharingMode::None => {}
            SharingMode::Pooling => {
                if bs_shared || !pool_at_shared_only {
                    out.extend_from_slice(&self.pool_iot);
                }
            }
            SharingMode::Leasing => {
                if bs_shared || !pool_at_shared_only {
                    out.extend_from_slice(&self.leased_iot);
                }
            }
        }
        Ok(out)
    }

    pub fn is_leased(&self, channel: &Channel) -> bool {
        self.leased_iot.contains(channel) || self.leased_ue.contains(channel)
    }
}

/// Builds the channelized view of the spectrum under one sharing mode.
pub fn build_plan(
    operators: &[Operator],
    mode: SharingMode,
    ue_channel_width_hz: f64,
    iot_channel_width_hz: f64,
) -> Result<SpectrumPlan, SpectrumError> {
    if !(ue_channel_width_hz > 0.0) || !(iot_channel_width_hz > 0.0) {
        return Err(SpectrumError::InvalidChannelWidth);
    }
    for (i, op) in operators.iter().enumerate() {
        op.validate()?;
        if operators[..i].iter().any(|o| o.id == op.id) {
            return Err(SpectrumError::DuplicateOperator(op.id));
        }
    }
    let mop_count = operators.iter().filter(|o| o.is_mop).count();
    let mop = match mode {
        SharingMode::Leasing => {
            if mop_count != 1 {
                return Err(SpectrumError::MopCount(mop_count));
            }
            Some(operators.iter().find(|o| o.is_mop).unwrap().id)
        }
        _ => None,
    };

    let mut plan = SpectrumPlan {
        mode,
        operators: operators.to_vec(),
        private_ue: Vec::new(),
        private_iot: Vec::new(),
        pool_ue: Vec::new(),
        pool_iot: Vec::new(),
        leased_ue: Vec::new(),
        leased_iot: Vec::new(),
        mop,
    };

    for op in operators {
        match mode {
            SharingMode::None => {
                plan.private_ue.push(channelize(&op.licensed_band, ue_channel_width_hz));
                plan.private_iot.push(channelize(&op.licensed_band, iot_channel_width_hz));
            }
            SharingMode::Pooling => {
                let (ue, iot) = match op.exclusive_part() {
                    Some(excl) => (
                        channelize(&excl, ue_channel_width_hz),
                        channelize(&excl, iot_channel_width_hz),
                    ),
                    None => (Vec::new(), Vec::new()),
                };
                plan.private_ue.push(ue);
                plan.private_iot.push(iot);
                if let Some(shared) = op.shared_part() {
                    plan.pool_ue.extend(channelize(&shared, ue_channel_width_hz));
                    plan.pool_iot.extend(channelize(&shared, iot_channel_width_hz));
                }
            }
            SharingMode::Leasing => {
                if op.is_mop {
                    let (ue, iot) = match op.exclusive_part() {
                        Some(excl) => (
                            channelize(&excl, ue_channel_width_hz),
                            channelize(&excl, iot_channel_width_hz),
                        ),
                        None => (Vec::new(), Vec::new()),
                    };
                    plan.private_ue.push(ue);
                    plan.private_iot.push(iot);
                    if let Some(shared) = op.shared_part() {
                        plan.leased_ue = channelize(&shared, ue_channel_width_hz);
                        plan.leased_iot = channelize(&shared, iot_channel_width_hz);
                    }
                } else {
                    // POPs keep their whole band; their shared_fraction is
                    // irrelevant when they are not the lessor.
                    plan.private_ue.push(channelize(&op.licensed_band, ue_channel_width_hz));
                    plan.private_iot.push(channelize(&op.licensed_band, iot_channel_width_hz));
                }
            }
        }
    }
    Ok(plan)
}

/// Partition of a contended pool among POPs, proportional to contribution
/// with iterative redistribution of excess above a POP's request.
///
/// If the total request fits, everyone gets what they asked. Otherwise each
/// unsatisfied POP receives a share proportional to its contribution; a POP
/// allocated more than its request is capped and the excess re-divided among
/// the still-unsatisfied POPs until a fixed point.
pub fn partition_pool(
    requests_hz: &[f64],
    contributions_hz: &[f64],
    pool_hz: f64,
) -> Result<Vec<f64>, SpectrumError> {
    assert_eq!(requests_hz.len(), contributions_hz.len());
    if requests_hz.iter().any(|r| *r < 0.0) {
        return Err(SpectrumError::NegativeRequest);
    }
    let contrib_sum: f64 = contributions_hz.iter().sum();
    if libm::fabs(contrib_sum - pool_hz) > 1.0 {
        return Err(SpectrumError::ContributionMismatch);
    }
    let total_request: f64 = requests_hz.iter().sum();
    if total_request <= pool_hz {
        return Ok(requests_hz.to_vec());
    }
    let n = requests_hz.len();
    let mut alloc = alloc::vec![0.0f64; n];
    let mut satisfied = alloc::vec![false; n];
    let mut remaining = pool_hz;
    loop {
        let weight: f64 = (0..n)
            .filter(|i| !satisfied[*i])
            .map(|i| contributions_hz[i])
            .sum();
        if weight <= 0.0 || remaining <= 0.0 {
            break;
        }
        let mut capped_any = false;
        let mut given = 0.0;
        for i in 0..n {
            if satisfied[i] {
                continue;
            }
            let share = remaining * contributions_hz[i] / weight;
            let headroom = requests_hz[i] - alloc[i];
            if share >= headroom {
                alloc[i] = requests_hz[i];
                given += headroom;
                satisfied[i] = true;
                capped_any = true;
            } else {
                alloc[i] += share;
                given += share;
            }
        }
        remaining -= given;
        if !capped_any {
            break;
        }
    }
    Ok(alloc)
}

/// 3GPP Release 13 cellular IoT solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum IoTProfileName {
    #[cfg_attr(feature = "serde", serde(rename = "EC-GSM-IoT"))]
    EcGsmIot,
    #[cfg_attr(feature = "serde", serde(rename = "NB-IoT"))]
    NbIot,
    #[cfg_attr(feature = "serde", serde(rename = "eMTC"))]
    Emtc,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IoTProfile {
    pub name: IoTProfileName,
    pub bandwidth_hz: f64,
    pub max_tx_power_dbm: f64,
    /// Idle-mode eDRX cycle, seconds.
    pub drx_cycle_idle_s: f64,
}

/// Catalog lookup with the Release 13 values.
pub fn iot_profile(name: IoTProfileName) -> IoTProfile {
    match name {
        IoTProfileName::EcGsmIot => IoTProfile {
            name,
            bandwidth_hz: 200.0e3,
            max_tx_power_dbm: 33.0,
            drx_cycle_idle_s: 52.0 * 60.0,
        },
        IoTProfileName::NbIot => IoTProfile {
            name,
            bandwidth_hz: 180.0e3,
            max_tx_power_dbm: 23.0,
            drx_cycle_idle_s: 3.0 * 3600.0,
        },
        IoTProfileName::Emtc => IoTProfile {
            name,
            bandwidth_hz: 1.08e6,
            max_tx_power_dbm: 23.0,
            drx_cycle_idle_s: 44.0 * 60.0,
        },
    }
}

impl core::str::FromStr for IoTProfileName {
    type Err = SpectrumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "EC-GSM-IoT" => Ok(IoTProfileName::EcGsmIot),
            "NB-IoT" => Ok(IoTProfileName::NbIot),
            "eMTC" => Ok(IoTProfileName::Emtc),
            _ => Err(SpectrumError::UnknownProfile),
        }
    }
}

/// A UE's channel grant.
#[derive(Clone, Debug, PartialEq)]
pub struct UeAssignment {
    /// Indices into the caller's UE list.
    pub served: Vec<(usize, Channel)>,
    pub unserved: Vec<usize>,
}

/// Round-robin UE channel assignment within each cell, drawing from the
/// operator's available list in seeded-shuffled order. Channels are reused
/// across cells (frequency reuse 1); UEs beyond the per-cell channel supply
/// are left unserved.
///
/// `ues` yields `(cell, operator, bs_shared)` per UE, indexed positionally.
pub fn assign_ue_channels(
    plan: &SpectrumPlan,
    ues: &[(BsId, OperatorId, bool)],
    pool_at_shared_only: bool,
    seed: u64,
) -> Result<UeAssignment, SpectrumError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = UeAssignment {
        served: Vec::new(),
        unserved: Vec::new(),
    };
    // Cells in first-appearance order keeps the result independent of BsId
    // numbering gaps.
    let mut cells: Vec<BsId> = Vec::new();
    for (bs, _, _) in ues {
        if !cells.contains(bs) {
            cells.push(*bs);
        }
    }
    for cell in cells {
        // Per (cell, operator): shuffled copy of the operator's list.
        let mut ops_here: Vec<OperatorId> = Vec::new();
        for (bs, op, _) in ues {
            if *bs == cell && !ops_here.contains(op) {
                ops_here.push(*op);
            }
        }
        for op in ops_here {
            let members: Vec<usize> = ues
                .iter()
                .enumerate()
                .filter(|(_, (bs, o, _))| *bs == cell && *o == op)
                .map(|(i, _)| i)
                .collect();
            let bs_shared = ues[members[0]].2;
            let mut channels = plan.ue_channels(op, bs_shared, pool_at_shared_only)?;
            channels.shuffle(&mut rng);
            for (k, ue_idx) in members.iter().enumerate() {
                if k < channels.len() {
                    out.served.push((*ue_idx, channels[k]));
                } else {
                    out.unserved.push(*ue_idx);
                }
            }
        }
    }
    Ok(out)
}

/// Uniform random pick from the device's eligible IoT channel list.
pub fn draw_iot_channel(
    eligible: &[Channel],
    rng: &mut impl RngCore,
) -> Result<Channel, SpectrumError> {
    if eligible.is_empty() {
        return Err(SpectrumError::NoSpectrum);
    }
    Ok(eligible[rng.random_range(0..eligible.len())])
}
