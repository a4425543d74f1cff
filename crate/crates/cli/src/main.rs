use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uec_lab::report::{curve_sets_from_json, emit_curves};
use uec_lab::{describe, execute, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "uec-lab", version, about = "Uniform equicontinuity lab for operator families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses of a config and write report.json and curve CSVs.
    Run {
        config: PathBuf,
        /// Output directory (default: the config's output.dir, else ./uec-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize the configured family.
    Describe { config: PathBuf },
    /// Re-emit the curve CSVs of an existing report.
    Curves {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uec-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, out } => {
            let (cfg, base) = ExperimentConfig::load(&config)?;
            let out = out
                .or_else(|| cfg.output.dir.as_ref().map(|d| base.join(d)))
                .unwrap_or_else(|| PathBuf::from("uec-out"));
            let res = execute(&cfg, &base, &out)?;
            for r in &res.report.results {
                println!("{}: {}", r.label, r.verdict);
            }
            println!("report: {}", res.report_path.display());
            for f in &res.curve_files {
                println!("curve: {}", f.display());
            }
        }
        Command::Describe { config } => {
            let (cfg, base) = ExperimentConfig::load(&config)?;
            print!("{}", describe(&cfg, &base)?);
        }
        Command::Curves { report, out } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", report.display())))?;
            for f in emit_curves(&curve_sets_from_json(&text)?, &out)? {
                println!("curve: {}", f.display());
            }
        }
    }
    Ok(())
}
