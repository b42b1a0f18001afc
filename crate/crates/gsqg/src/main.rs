//! Command-line entry point: parse the config, dispatch the requested mode,
//! and write results under the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 convergence failure,
//! 4 infeasible problem data, 1 anything else.

use clap::Parser;
use gsqg::config::{Mode, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gsqg",
    about = "Co-rotating and translating vortex solutions of the generalized \
             surface quasi-geostrophic equation by variational rearrangement"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides the config's `output`; default `out`).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Run mode (overrides the config's `mode`).
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

fn parse_mode(text: &str) -> Result<Mode, String> {
    match text {
        "rotate" => Ok(Mode::Rotate),
        "translate" => Ok(Mode::Translate),
        "sweep" => Ok(Mode::Sweep),
        "oracle" => Ok(Mode::Oracle),
        other => Err(format!(
            "unknown mode {other:?}, expected rotate | translate | sweep | oracle"
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RunConfig::from_file(&cli.config) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    if let Some(mode) = cli.mode {
        cfg.mode = Some(mode);
    }
    let out_dir = cli
        .output
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    match gsqg::run::run(&cfg, &out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
