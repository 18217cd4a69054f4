use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use weakmeas_cli::{
    load_config, run, write_outputs, CliError, Experiment, RawConfig, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE,
};

/// Simulations of continuous weak quantum measurement.
#[derive(Debug, Parser)]
#[command(name = "weakmeas", version)]
struct Args {
    experiment: Experiment,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "weakmeas-out")]
    out: PathBuf,
    /// Extra `key=value` override; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let mut raw = match &args.config {
        Some(p) => load_config(p)?,
        None => RawConfig::default(),
    };
    raw.apply_overrides(&args.set)?;
    if let Some(seed) = args.seed {
        raw.set("seed", seed.to_string());
    }
    let out = run(args.experiment, &raw)?;
    for c in &out.report.checks {
        println!("{}", c.line());
    }
    for p in write_outputs(&args.out, args.experiment, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(out.report.passed())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match execute(&args) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code as u8)
}
