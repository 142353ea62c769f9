use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shcgm::harness::{self, fit_loglog_slope, RunConfig, TraceTable};

#[derive(Parser)]
#[command(name = "shcgm", version, about = "Run stochastic conditional gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configs (concurrently) and write their CSV traces.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Fit a log-log slope to a trace column over k in [kmin, kmax].
    Slope {
        trace: PathBuf,
        column: String,
        kmin: f64,
        kmax: f64,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &PathBuf) -> shcgm::Result<RunConfig> {
    RunConfig::parse(&std::fs::read_to_string(path)?)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { configs } => {
            let mut parsed = Vec::new();
            for path in &configs {
                match load(path).and_then(|c| c.validate().map(|_| c)) {
                    Ok(c) => parsed.push(c),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        return ExitCode::FAILURE;
                    }
                }
            }
            let mut status = ExitCode::SUCCESS;
            for (path, result) in configs.iter().zip(harness::run_sweep(&parsed)) {
                match result {
                    Ok(summary) => println!("{}: {}", path.display(), summary.line()),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        status = ExitCode::FAILURE;
                    }
                }
            }
            status
        }
        Command::Slope {
            trace,
            column,
            kmin,
            kmax,
        } => {
            let fit = std::fs::read_to_string(&trace)
                .map_err(shcgm::Error::from)
                .and_then(|t| TraceTable::parse_csv(&t))
                .and_then(|t| fit_loglog_slope(&t, &column, kmin, kmax));
            match fit {
                Ok(f) => {
                    println!(
                        "slope={:.6} intercept={:.6} r2={:.6} rows={} skipped={}",
                        f.slope, f.intercept, f.r_squared, f.used, f.skipped
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { config } => match load(&config).and_then(|c| {
            c.validate()?;
            harness::build_problem(&c).map(|_| c)
        }) {
            Ok(c) => {
                print!("{}", c.serialize());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::FAILURE
            }
        },
    }
}
