use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dualtype_cli::{load_config, reference_config, run, CliError, RunConfig};
use dualtype_core::protocols::ExperimentKind;

/// Simulate an S/F dual-type qubit experiment and fit its curve.
#[derive(Debug, Parser)]
#[command(name = "dualtype", version)]
struct Args {
    /// TOML run configuration; omitted keys take their defaults
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// experiment to run, overriding the config
    #[arg(long, value_name = "NAME")]
    experiment: Option<ExperimentKind>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// shots per sweep point
    #[arg(long, value_name = "N")]
    shots: Option<u64>,
    /// output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// print the all-defaults configuration and exit
    #[arg(long)]
    emit_reference_config: bool,
}

fn configure(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(k) = args.experiment {
        cfg.experiment = k;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.shots {
        cfg.shots = n;
    }
    if let Some(d) = &args.out {
        cfg.output_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.emit_reference_config {
        print!("{}", reference_config());
        return ExitCode::SUCCESS;
    }
    let result = configure(&args).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            if !report.converged {
                eprintln!("error: at least one fit did not converge; outputs were written");
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
