use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kposim_cli::commands::{dispatch, RunOptions};
use kposim_cli::config::{Drive, ExperimentConfig, ExperimentKind, Model, Overrides};

/// Simulator for the conditional-driving R_zz gate on Kerr-nonlinear
/// parametric oscillators.
#[derive(Parser)]
#[command(name = "kposim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML experiment config, or a manifest.json from a previous run.
    #[arg(long)]
    config: PathBuf,
    /// Override the model (simple | sc).
    #[arg(long)]
    model: Option<String>,
    /// Override the gate drive (sum | difference).
    #[arg(long)]
    drive: Option<String>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads for sweep points (0 = machine parallelism).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Override both solver tolerances.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the per-mode Fock dimension.
    #[arg(long = "fock-dim")]
    fock_dim: Option<usize>,
    /// Render quick-look SVG plots next to the CSVs.
    #[arg(long, default_value_t = false)]
    plot: bool,
    /// Re-run with halved tolerances and a +8 Fock bump and abort if the
    /// results move.
    #[arg(long, default_value_t = false)]
    certify: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Pump-ramp photon number, simple vs SC model (three-curve CSV).
    PhotonRamp(CommonArgs),
    /// Gate-amplitude sweep: rotation angle, fidelity, leakage.
    RzzSweep(CommonArgs),
    /// Infidelity vs decay time T1 at a tuned rotation angle.
    LossSweep(CommonArgs),
    /// Print the resolved parameter table.
    Calibrate(CommonArgs),
}

fn parse_model(s: &str) -> Result<Model, String> {
    match s {
        "simple" => Ok(Model::Simple),
        "sc" => Ok(Model::Sc),
        other => Err(format!("unknown model '{other}' (simple | sc)")),
    }
}

fn parse_drive(s: &str) -> Result<Drive, String> {
    match s {
        "sum" => Ok(Drive::Sum),
        "difference" => Ok(Drive::Difference),
        other => Err(format!("unknown drive '{other}' (sum | difference)")),
    }
}

fn run(kind: ExperimentKind, args: &CommonArgs) -> kposim_cli::CliResult<()> {
    let mut overrides = Overrides {
        out: args.out.clone(),
        tol: args.tol,
        fock_dim: args.fock_dim,
        certify: if args.certify { Some(true) } else { None },
        ..Overrides::default()
    };
    if let Some(m) = &args.model {
        overrides.model = Some(parse_model(m).map_err(kposim_cli::CliError::Config)?);
    }
    if let Some(d) = &args.drive {
        overrides.drive = Some(parse_drive(d).map_err(kposim_cli::CliError::Config)?);
    }
    let mut config = ExperimentConfig::load(&args.config)?;
    config.apply_overrides(&overrides);
    let options = RunOptions {
        workers: args.workers,
        plot: args.plot,
    };
    dispatch(kind, config, &options)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::PhotonRamp(a) => (ExperimentKind::PhotonRamp, a),
        Command::RzzSweep(a) => (ExperimentKind::RzzSweep, a),
        Command::LossSweep(a) => (ExperimentKind::LossSweep, a),
        Command::Calibrate(a) => (ExperimentKind::Calibrate, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kposim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
