use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use magnon_core::coupling::ScalingModel;
use magnon_core::Observable;
use magnon_cli::commands;
use magnon_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "magnon", version, about = "Magnon-cavity spectra, maps, Walker tables and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complex S21, S11, per-mode S31 and eta at one bias field.
    Spectrum {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Output file; defaults to the config's `output` key, then stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Unwrap the phase columns along frequency.
        #[arg(long)]
        unwrap: bool,
        /// Override every mode's beta, given in dB.
        #[arg(long, allow_hyphen_values = true)]
        beta_db: Option<f64>,
        /// Add Gaussian noise, relative to the peak magnitude (uses sweep.seed).
        #[arg(long)]
        noise: Option<f64>,
    },
    /// One real observable over the field x frequency grid (long format).
    Map {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Output file; defaults to the config's `output` key, then stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Overrides sweep.observable, e.g. `eta` or `s31_power:K`.
        #[arg(long)]
        observable: Option<Observable>,
        #[arg(long)]
        unwrap: bool,
        #[arg(long, allow_hyphen_values = true)]
        beta_db: Option<f64>,
    },
    /// Walker mode frequencies: closed forms against the characteristic-equation solver.
    Modes {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Output file; defaults to the config's `output` key, then stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Spin numbers, cooperativities, optical couplings and efficiency from measured g and gamma.
    Derive {
        /// Run configuration (TOML).
        config: PathBuf,
        /// Output file; defaults to the config's `output` key, then stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Least-squares fit of a measured S21/S11 spectrum.
    Fit {
        /// Run configuration (TOML).
        config: PathBuf,
        /// CSV with `f_hz` and `re_s21`/`im_s21` (or `re_s11`/`im_s11`) columns.
        #[arg(short, long)]
        data: PathBuf,
        /// Output file; defaults to the config's `output` key, then stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Fits a size-scaling law to `diameter_m,value[,include]` points.
    Scaling {
        /// CSV with `diameter_m`, `value` and optional `include` columns.
        points: PathBuf,
        /// One of linear_in_sqrt_v, quadratic_in_sqrt_v, quartic_in_sqrt_v,
        /// offset_plus_inverse, inverse_square.
        #[arg(short, long)]
        model: ScalingModel,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, beta_db: Option<f64>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(db) = beta_db {
        cfg.apply_beta_db(db)?;
    }
    Ok(cfg)
}

fn out_path(out: Option<PathBuf>, cfg: &RunConfig) -> Option<PathBuf> {
    out.or_else(|| cfg.output.clone())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { config, out, unwrap, beta_db, noise } => {
            let cfg = load(&config, beta_db)?;
            let out = out_path(out, &cfg);
            commands::spectrum(&cfg, &commands::SpectrumOptions { unwrap, noise }, out.as_deref())
        }
        Command::Map { config, out, observable, unwrap, beta_db } => {
            let cfg = load(&config, beta_db)?;
            let out = out_path(out, &cfg);
            commands::map(&cfg, observable, unwrap, out.as_deref())
        }
        Command::Modes { config, out } => {
            let cfg = load(&config, None)?;
            commands::modes(&cfg, out_path(out, &cfg).as_deref())
        }
        Command::Derive { config, out } => {
            let cfg = load(&config, None)?;
            commands::derive(&cfg, out_path(out, &cfg).as_deref())
        }
        Command::Fit { config, data, out } => {
            let cfg = load(&config, None)?;
            commands::fit(&cfg, &data, out_path(out, &cfg).as_deref())
        }
        Command::Scaling { points, model, out } => commands::scaling(&points, model, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
