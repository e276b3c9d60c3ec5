use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qfts::{run_experiment, run_verification_suite, RunArgs, RunError, VerifyOptions, EXIT_NUMERIC};

#[derive(Parser)]
#[command(version, about = "Finite-time qubit state preparation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and print the settling report.
    Run(Box<RunArgs>),
    /// Run the built-in consistency checks.
    Verify {
        /// Override the integration step.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
    },
}

fn run(args: RunArgs) -> Result<(), RunError> {
    let file = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| RunError::Io {
            path: path.clone(),
            source: e,
        })?),
        None => None,
    };
    let cfg = args.resolve(file.as_deref())?;
    let summary = run_experiment(&cfg)?;
    print!("{}", summary.report);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args).map(|_| 0),
        Command::Verify { dt, t_max } => {
            let defaults = VerifyOptions::default();
            let opts = VerifyOptions {
                dt: dt.unwrap_or(defaults.dt),
                t_max: t_max.unwrap_or(defaults.t_max),
            };
            run_verification_suite(&opts).map(|report| {
                print!("{report}");
                if report.all_passed() {
                    0
                } else {
                    EXIT_NUMERIC
                }
            })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
