//! Uplink link budget: dBm/mW conversions, log-distance pathloss, noise,
//! partial-band interference aggregation, SINR, and Shannon throughput.
//!
//! All functions are pure; zero aggregate interference is represented by a
//! `f64::NEG_INFINITY` sentinel in dBm so that the no-interferer case stays
//! exact through `dbm_to_mw` (which maps it to 0 mW).

use crate::geom::Position;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadioError {
    /// `mw_to_dbm` of a non-positive power.
    NonPositivePower,
    /// Channel with `high <= low`.
    EmptyChannel,
    /// Propagation model violating its invariants.
    InvalidPropagationModel,
}

impl core::fmt::Display for RadioError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RadioError::NonPositivePower => write!(f, "power in milliwatts must be positive"),
            RadioError::EmptyChannel => write!(f, "channel requires high > low"),
            RadioError::InvalidPropagationModel => {
                write!(f, "propagation model violates its invariants")
            }
        }
    }
}

impl core::error::Error for RadioError {}

/// A contiguous frequency block, `[low_hz, high_hz)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Channel {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Channel {
    pub fn new(low_hz: f64, high_hz: f64) -> Result<Self, RadioError> {
        if high_hz > low_hz {
            Ok(Channel { low_hz, high_hz })
        } else {
            Err(RadioError::EmptyChannel)
        }
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.high_hz - self.low_hz
    }

    /// Fraction of `self`'s bandwidth that falls inside `victim`.
    ///
    /// Flat power spectral density across the channel is assumed, so this is
    /// the factor by which `self`'s transmit power leaks into `victim`.
    pub fn overlap_fraction(&self, victim: &Channel) -> f64 {
        let low = self.low_hz.max(victim.low_hz);
        let high = self.high_hz.min(victim.high_hz);
        if high > low {
            (high - low) / self.bandwidth_hz()
        } else {
            0.0
        }
    }

    pub fn overlaps(&self, other: &Channel) -> bool {
        self.overlap_fraction(other) > 0.0
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    // NEG_INFINITY maps to exactly 0 mW.
    libm::pow(10.0, dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> Result<f64, RadioError> {
    if mw > 0.0 {
        Ok(10.0 * libm::log10(mw))
    } else {
        Err(RadioError::NonPositivePower)
    }
}

/// Zero maps to the `NEG_INFINITY` sentinel instead of a domain error.
pub fn mw_to_dbm_or_sentinel(mw: f64) -> f64 {
    if mw > 0.0 {
        10.0 * libm::log10(mw)
    } else {
        f64::NEG_INFINITY
    }
}

/// Log-distance pathloss, `PL = L0 + slope * log10(max(d, d_min) / d_ref)`.
///
/// Defaults are the common macro-urban parameterization 128.1 dB at 1 km
/// with 37.6 dB per decade.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PropagationModel {
    pub reference_loss_db: f64,
    pub reference_distance_m: f64,
    pub slope_db_per_decade: f64,
    pub min_distance_m: f64,
}

impl Default for PropagationModel {
    fn default() -> Self {
        PropagationModel {
            reference_loss_db: 128.1,
            reference_distance_m: 1000.0,
            slope_db_per_decade: 37.6,
            min_distance_m: 10.0,
        }
    }
}

impl PropagationModel {
    pub fn validate(&self) -> Result<(), RadioError> {
        if self.slope_db_per_decade > 0.0
            && self.reference_distance_m > 0.0
            && self.min_distance_m >= 1.0
        {
            Ok(())
        } else {
            Err(RadioError::InvalidPropagationModel)
        }
    }

    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        let d = distance_m.max(self.min_distance_m);
        self.reference_loss_db + self.slope_db_per_decade * libm::log10(d / self.reference_distance_m)
    }

    pub fn rx_power_dbm(&self, tx_dbm: f64, distance_m: f64) -> f64 {
        tx_dbm - self.pathloss_db(distance_m)
    }
}

/// Receiver noise: thermal PSD plus noise figure.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct NoiseModel {
    pub psd_dbm_per_hz: f64,
    pub receiver_noise_figure_db: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            psd_dbm_per_hz: -174.0,
            receiver_noise_figure_db: 5.0,
        }
    }
}

impl NoiseModel {
    pub fn noise_dbm(&self, bandwidth_hz: f64) -> f64 {
        self.psd_dbm_per_hz + 10.0 * libm::log10(bandwidth_hz) + self.receiver_noise_figure_db
    }
}

/// An interfering uplink transmitter as seen from a victim receiver.
#[derive(Clone, Copy, Debug)]
pub struct TxSource {
    pub tx_power_dbm: f64,
    pub position: Position,
    pub channel: Channel,
}

/// Aggregate co-channel interference at `victim_pos` over `victim_channel`.
///
/// Each transmitter's received power is scaled by the fraction of its
/// bandwidth overlapping the victim channel and summed in linear units.
/// Returns `NEG_INFINITY` when nothing overlaps.
pub fn aggregate_interference_dbm(
    victim_pos: &Position,
    victim_channel: &Channel,
    transmitters: &[TxSource],
    model: &PropagationModel,
) -> f64 {
    let mut sum_mw = 0.0;
    for tx in transmitters {
        let frac = tx.channel.overlap_fraction(victim_channel);
        if frac > 0.0 {
            let d = tx.position.distance_m(victim_pos);
            sum_mw += dbm_to_mw(model.rx_power_dbm(tx.tx_power_dbm, d)) * frac;
        }
    }
    mw_to_dbm_or_sentinel(sum_mw)
}

/// Linear SINR. The interference sentinel (`NEG_INFINITY`) contributes zero.
pub fn sinr_linear(signal_dbm: f64, interference_dbm: f64, noise_dbm: f64) -> f64 {
    dbm_to_mw(signal_dbm) / (dbm_to_mw(interference_dbm) + dbm_to_mw(noise_dbm))
}

/// Shannon capacity proxy, `B * log2(1 + sinr)`.
pub fn throughput_bps(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * libm::log2(1.0 + sinr)
}

/// Deterministic log-normal shadowing for the link `(a_id, b_id)`.
///
/// The draw is a pure function of the seed and the endpoint ids, so a link's
/// shadowing is stable within a trial no matter how often it is evaluated.
pub fn shadowing_db(sigma_db: f64, seed: u64, a_id: u64, b_id: u64) -> f64 {
    let mut s = crate::seed::derive(seed, a_id ^ (b_id.rotate_left(32)));
    // Box-Muller from two uniforms in (0, 1].
    let u1 = ((crate::seed::split(&mut s) >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = (crate::seed::split(&mut s) >> 11) as f64 / (1u64 << 53) as f64;
    let z = libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2);
    sigma_db * z
}
