//! Scenario configuration: JSON schema, defaults, and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use coexsim_core::admission::{AdmissionPolicy, MopRule, Shadowing};
use coexsim_core::radio::{Channel, NoiseModel, PropagationModel};
use coexsim_core::spectrum::{Operator, SharingMode};
use coexsim_core::topology::{Assignment, AssociationMode, DeviceOperatorPolicy};
use coexsim_core::{OperatorId, Rect};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TopologySpec {
    Hex {
        rings: u32,
        isd_m: f64,
        #[serde(default = "default_assignment")]
        assignment: Assignment,
    },
    Uniform {
        area: AreaSpec,
        count_per_operator: u32,
    },
    Csv {
        path: String,
    },
}

fn default_assignment() -> Assignment {
    Assignment::PerOperatorOverlay
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSpec {
    pub min_x_m: f64,
    pub min_y_m: f64,
    pub max_x_m: f64,
    pub max_y_m: f64,
}

impl AreaSpec {
    pub fn to_rect(self) -> Rect {
        Rect::new(self.min_x_m, self.min_y_m, self.max_x_m, self.max_y_m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub id: u32,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub shared_fraction: f64,
    #[serde(default)]
    pub is_mop: bool,
}

impl OperatorSpec {
    pub fn to_operator(&self) -> Result<Operator, ConfigError> {
        let licensed_band = Channel::new(self.band_low_hz, self.band_high_hz)
            .map_err(|e| invalid(format!("operator {}: {e}", self.id)))?;
        let op = Operator {
            id: OperatorId(self.id),
            licensed_band,
            shared_fraction: self.shared_fraction,
            is_mop: self.is_mop,
        };
        op.validate()
            .map_err(|e| invalid(format!("operator {}: {e}", self.id)))?;
        Ok(op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySpec {
    pub interference_threshold_dbm: f64,
    pub degradation_tolerance: f64,
    pub channel_retries: u32,
    pub enforce_threshold: bool,
    pub enforce_degradation: bool,
    /// Degradation cap protecting the lessor's UEs in leasing mode.
    pub mop_tolerance: f64,
}

impl Default for PolicySpec {
    fn default() -> Self {
        PolicySpec {
            interference_threshold_dbm: -62.0,
            degradation_tolerance: 0.1,
            channel_retries: 1,
            enforce_threshold: true,
            enforce_degradation: true,
            mop_tolerance: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSpec {
    pub reference_loss_db: f64,
    pub reference_distance_m: f64,
    pub slope_db_per_decade: f64,
    pub min_distance_m: f64,
}

impl Default for PropagationSpec {
    fn default() -> Self {
        let m = PropagationModel::default();
        PropagationSpec {
            reference_loss_db: m.reference_loss_db,
            reference_distance_m: m.reference_distance_m,
            slope_db_per_decade: m.slope_db_per_decade,
            min_distance_m: m.min_distance_m,
        }
    }
}

impl PropagationSpec {
    pub fn to_model(self) -> Result<PropagationModel, ConfigError> {
        let model = PropagationModel {
            reference_loss_db: self.reference_loss_db,
            reference_distance_m: self.reference_distance_m,
            slope_db_per_decade: self.slope_db_per_decade,
            min_distance_m: self.min_distance_m,
        };
        model.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(model)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    pub psd_dbm_per_hz: f64,
    pub receiver_noise_figure_db: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        let n = NoiseModel::default();
        NoiseSpec {
            psd_dbm_per_hz: n.psd_dbm_per_hz,
            receiver_noise_figure_db: n.receiver_noise_figure_db,
        }
    }
}

impl NoiseSpec {
    pub fn to_model(self) -> NoiseModel {
        NoiseModel {
            psd_dbm_per_hz: self.psd_dbm_per_hz,
            receiver_noise_figure_db: self.receiver_noise_figure_db,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationSpec {
    /// Own-operator under no sharing and leasing, any-shared under pooling.
    Auto,
    OwnOperator,
    AnyShared,
}

impl AssociationSpec {
    pub fn resolve(self, mode: SharingMode) -> AssociationMode {
        match self {
            AssociationSpec::OwnOperator => AssociationMode::OwnOperator,
            AssociationSpec::AnyShared => AssociationMode::AnyShared,
            AssociationSpec::Auto => match mode {
                SharingMode::Pooling => AssociationMode::AnyShared,
                SharingMode::None | SharingMode::Leasing => AssociationMode::OwnOperator,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub topology: TopologySpec,
    pub operators: Vec<OperatorSpec>,
    pub mode: SharingMode,
    pub ues_per_cell: u32,
    pub iot_candidates_per_cell: u32,
    pub ue_channel_width_hz: f64,
    pub iot_channel_width_hz: f64,
    pub ue_tx_power_dbm: f64,
    pub iot_tx_power_dbm: f64,
    pub policy: PolicySpec,
    pub propagation: PropagationSpec,
    pub noise: NoiseSpec,
    pub shadowing: Option<ShadowingSpec>,
    pub association: AssociationSpec,
    pub device_operator_policy: DeviceOperatorPolicy,
    pub pool_at_shared_bs_only: bool,
    pub ue_intercell_interference: bool,
    pub trials: u32,
    pub master_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowingSpec {
    pub sigma_db: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: TopologySpec::Hex {
                rings: 1,
                isd_m: 2000.0,
                assignment: Assignment::PerOperatorOverlay,
            },
            operators: vec![
                OperatorSpec {
                    id: 1,
                    band_low_hz: 600.0e6,
                    band_high_hz: 700.0e6,
                    shared_fraction: 1.0,
                    is_mop: false,
                },
                OperatorSpec {
                    id: 2,
                    band_low_hz: 700.0e6,
                    band_high_hz: 800.0e6,
                    shared_fraction: 1.0,
                    is_mop: false,
                },
            ],
            mode: SharingMode::None,
            ues_per_cell: 20,
            iot_candidates_per_cell: 2000,
            ue_channel_width_hz: 5.0e6,
            iot_channel_width_hz: 1.0e6,
            ue_tx_power_dbm: 25.0,
            iot_tx_power_dbm: 20.0,
            policy: PolicySpec::default(),
            propagation: PropagationSpec::default(),
            noise: NoiseSpec::default(),
            shadowing: None,
            association: AssociationSpec::Auto,
            device_operator_policy: DeviceOperatorPolicy::CellOwner,
            pool_at_shared_bs_only: true,
            ue_intercell_interference: false,
            trials: 100,
            master_seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(json: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials < 1 {
            return Err(invalid("trials must be >= 1"));
        }
        if self.operators.is_empty() {
            return Err(invalid("at least one operator is required"));
        }
        let ops = self.operators()?;
        coexsim_core::spectrum::build_plan(
            &ops,
            self.mode,
            self.ue_channel_width_hz,
            self.iot_channel_width_hz,
        )
        .map_err(|e| invalid(e.to_string()))?;
        self.propagation.to_model()?;
        if !(self.noise.psd_dbm_per_hz < 0.0) {
            return Err(invalid("noise psd_dbm_per_hz must be < 0"));
        }
        if !(0.0..=1.0).contains(&self.policy.degradation_tolerance) {
            return Err(invalid("degradation_tolerance must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.policy.mop_tolerance) {
            return Err(invalid("mop_tolerance must be in [0, 1]"));
        }
        match &self.topology {
            TopologySpec::Hex { isd_m, .. } => {
                if !(*isd_m > 0.0) {
                    return Err(invalid("isd_m must be > 0"));
                }
            }
            TopologySpec::Uniform {
                area,
                count_per_operator,
            } => {
                if area.to_rect().is_degenerate() {
                    return Err(invalid("uniform topology area is degenerate"));
                }
                if *count_per_operator < 1 {
                    return Err(invalid("count_per_operator must be >= 1"));
                }
            }
            TopologySpec::Csv { path } => {
                if path.is_empty() {
                    return Err(invalid("csv topology path is empty"));
                }
            }
        }
        Ok(())
    }

    pub fn operators(&self) -> Result<Vec<Operator>, ConfigError> {
        self.operators.iter().map(|o| o.to_operator()).collect()
    }

    pub fn admission_policy(&self) -> AdmissionPolicy {
        let mop = if self.mode == SharingMode::Leasing {
            self.operators
                .iter()
                .find(|o| o.is_mop)
                .map(|o| MopRule {
                    operator: OperatorId(o.id),
                    tolerance: self.policy.mop_tolerance,
                })
        } else {
            None
        };
        AdmissionPolicy {
            interference_threshold_dbm: self.policy.interference_threshold_dbm,
            degradation_tolerance: self.policy.degradation_tolerance,
            channel_retries: self.policy.channel_retries,
            enforce_threshold: self.policy.enforce_threshold,
            enforce_degradation: self.policy.enforce_degradation,
            mop,
        }
    }

    pub fn shadowing(&self, seed: u64) -> Option<Shadowing> {
        self.shadowing.map(|s| Shadowing {
            sigma_db: s.sigma_db,
            seed,
        })
    }
}
