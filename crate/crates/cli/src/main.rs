use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;
use sparse_eit_cli::commands::{self, Outcome};
use sparse_eit_cli::error::{CliError, EXIT_CONFIG};
use sparse_eit_cli::ExperimentConfig;

/// Sparsity-regularized conductivity reconstruction from partial boundary data.
#[derive(Parser, Debug)]
#[command(name = "sparse-eit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory for data, fields, logs and the manifest.
    #[arg(long, short)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the parallel solves (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Set a configuration value, e.g. `--override data.epsilon=0.02`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate noisy Cauchy data on the fine mesh.
    Simulate(Common),
    /// Reconstruct the conductivity from a data file.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Data file; defaults to data.txt in the output directory.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Compare the discrete ND map with its analytic spectrum.
    NdmapCheck(Common),
    /// Compare the adjoint gradient with finite differences.
    GradientCheck(Common),
}

fn resolve(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(dir) = &common.output_dir {
        overrides.push(format!(
            "output_dir={}",
            toml::Value::String(dir.display().to_string())
        ));
    }
    let config = ExperimentConfig::load(common.config.as_deref(), &overrides)?;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config {
                path: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&resolve(&c)?),
        Command::Reconstruct { common, data } => {
            commands::reconstruct(&resolve(&common)?, data.as_deref())
        }
        Command::NdmapCheck(c) => commands::ndmap_check(&resolve(&c)?),
        Command::GradientCheck(c) => commands::gradient_check(&resolve(&c)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPARSE_EIT_LOG", "info"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code as u8),
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
