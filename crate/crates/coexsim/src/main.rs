use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coexsim::config::{ConfigError, ScenarioConfig};
use coexsim::experiment::{
    compare_modes, run_experiment, sweep_density, sweep_tolerance, ExperimentError,
};
use coexsim::output;
use coexsim_core::spectrum::SharingMode;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "coexsim",
    about = "Monte Carlo simulator for IoT/cellular uplink spectrum coexistence",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    None,
    Pooling,
    Leasing,
}

impl From<ModeArg> for SharingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::None => SharingMode::None,
            ModeArg::Pooling => SharingMode::Pooling,
            ModeArg::Leasing => SharingMode::Leasing,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config JSON; defaults apply for a missing file only when
    /// omitted entirely.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<u32>,
    /// Override the config's sharing mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker thread count (default: all cores). Outputs are identical for
    /// any value.
    #[arg(long)]
    workers: Option<usize>,
    /// Format for the stdout report.
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trials.csv + summary.json.
    Run(CommonArgs),
    /// Sweep the degradation tolerance across modes.
    SweepTolerance {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated tolerances, ascending.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
        tolerances: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![ModeArg::None, ModeArg::Pooling])]
        modes: Vec<ModeArg>,
    },
    /// Sweep the hex-grid inter-site distance across modes.
    SweepDensity {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated inter-site distances in meters.
        #[arg(long, value_delimiter = ',', default_values_t = vec![500.0, 1000.0, 2000.0])]
        isds: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![ModeArg::None, ModeArg::Pooling])]
        modes: Vec<ModeArg>,
    },
    /// Paired per-seed comparison of sharing modes.
    CompareModes {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![ModeArg::None, ModeArg::Pooling])]
        modes: Vec<ModeArg>,
    },
    /// Parse and validate a config; print the normalized form.
    ValidateConfig {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the full default configuration and exit.
        #[arg(long)]
        print_defaults: bool,
    },
    /// Generate the configured topology and write it as a BS CSV.
    GenTopology(CommonArgs),
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<ExperimentError> for AppError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(c) => AppError::Config(c.to_string()),
            ExperimentError::Trial(t) => AppError::Runtime(t.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

fn load_config(common: &CommonArgs) -> Result<ScenarioConfig, AppError> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(mode) = common.mode {
        cfg.mode = mode.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_workers(common: &CommonArgs) -> Result<(), AppError> {
    if let Some(n) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| AppError::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn cmd_run(common: &CommonArgs) -> Result<(), AppError> {
    let cfg = load_config(common)?;
    init_workers(common)?;
    let exp = run_experiment(&cfg)?;
    output::write_file(&common.out.join("trials.csv"), |w| {
        output::write_trials_csv(&exp, w)
    })?;
    output::write_file(&common.out.join("summary.json"), |w| {
        output::write_summary_json(&exp, w)
    })?;
    match common.format {
        FormatArg::Json => println!("{}", serde_json::to_string_pretty(&output::summary_json(&exp)).unwrap()),
        FormatArg::Csv => {
            let mut buf = Vec::new();
            output::write_trials_csv(&exp, &mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
    }
    Ok(())
}

fn emit_sweep(
    rows: &[coexsim::experiment::SweepRow],
    out: &Path,
    file: &str,
    format: FormatArg,
) -> Result<(), AppError> {
    output::write_file(&out.join(file), |w| output::write_sweep_csv(rows, w))?;
    match format {
        FormatArg::Csv => {
            let mut buf = Vec::new();
            output::write_sweep_csv(rows, &mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
        FormatArg::Json => {
            let json: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "param": output::round_sig(r.param),
                        "mode": r.mode.to_string(),
                        "mean": output::round_sig(r.mean),
                        "std": output::round_sig(r.std),
                        "ci95": output::round_sig(r.ci95),
                        "ratio": output::round_sig(r.ratio),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&json).unwrap());
        }
    }
    Ok(())
}

fn run_command(command: Command) -> Result<(), AppError> {
    match command {
        Command::Run(common) => cmd_run(&common),
        Command::SweepTolerance {
            common,
            tolerances,
            modes,
        } => {
            if tolerances.windows(2).any(|w| w[0] > w[1]) {
                return Err(AppError::Config("tolerances must be ascending".into()));
            }
            let cfg = load_config(&common)?;
            init_workers(&common)?;
            let modes: Vec<SharingMode> = modes.into_iter().map(Into::into).collect();
            let rows = sweep_tolerance(&cfg, &tolerances, &modes)?;
            emit_sweep(&rows, &common.out, "sweep_tolerance.csv", common.format)
        }
        Command::SweepDensity {
            common,
            isds,
            modes,
        } => {
            let cfg = load_config(&common)?;
            init_workers(&common)?;
            let modes: Vec<SharingMode> = modes.into_iter().map(Into::into).collect();
            let rows = sweep_density(&cfg, &isds, &modes)?;
            emit_sweep(&rows, &common.out, "sweep_density.csv", common.format)
        }
        Command::CompareModes { common, modes } => {
            let cfg = load_config(&common)?;
            init_workers(&common)?;
            let modes: Vec<SharingMode> = modes.into_iter().map(Into::into).collect();
            let cmp = compare_modes(&cfg, &modes)?;
            output::write_file(&common.out.join("compare_modes.csv"), |w| {
                output::write_compare_csv(&cmp, w)
            })?;
            let summary = output::compare_summary_json(&cmp);
            output::write_file(&common.out.join("compare_summary.json"), |w| {
                writeln!(w, "{}", serde_json::to_string_pretty(&summary).unwrap())
            })?;
            println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            Ok(())
        }
        Command::ValidateConfig {
            config,
            print_defaults,
        } => {
            if print_defaults {
                let defaults = ScenarioConfig::default();
                println!("{}", serde_json::to_string_pretty(&defaults).unwrap());
                return Ok(());
            }
            let cfg = match config {
                Some(path) => ScenarioConfig::from_file(&path)?,
                None => ScenarioConfig::default(),
            };
            println!("{}", serde_json::to_string_pretty(&cfg).unwrap());
            Ok(())
        }
        Command::GenTopology(common) => {
            let cfg = load_config(&common)?;
            let prepared = coexsim::Prepared::new(cfg.clone())?;
            let topology = match prepared.fixed_topology {
                Some(t) => t,
                None => {
                    // Random generator: realize it once from the master seed.
                    let ids: Vec<coexsim_core::OperatorId> =
                        prepared.operators.iter().map(|o| o.id).collect();
                    match &cfg.topology {
                        coexsim::config::TopologySpec::Uniform {
                            area,
                            count_per_operator,
                        } => coexsim_core::topology::gen_uniform(
                            area.to_rect(),
                            *count_per_operator,
                            &ids,
                            cfg.master_seed,
                        )
                        .map_err(|e| AppError::Config(e.to_string()))?,
                        _ => unreachable!("non-uniform topologies are fixed"),
                    }
                }
            };
            output::write_file(&common.out.join("bs.csv"), |w| {
                coexsim::bscsv::write_bs_csv(&topology, w)
            })?;
            println!("wrote {} base stations", topology.base_stations.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
