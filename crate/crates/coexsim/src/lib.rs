//! Monte Carlo harness, experiment orchestration, and file formats for the
//! IoT/cellular uplink coexistence simulator built on `coexsim-core`.

pub mod bscsv;
pub mod config;
pub mod experiment;
pub mod output;
pub mod trial;

pub use config::ScenarioConfig;
pub use experiment::{compare_modes, run_experiment, sweep_density, sweep_tolerance};
pub use trial::{run_trial, Prepared, TrialResult};
