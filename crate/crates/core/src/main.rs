use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bvlab::harness::{self, Selection};
use bvlab::Error;

#[derive(Parser)]
#[command(name = "bvlab", version, about = "Scalar conservation laws on manifolds with boundary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write its artifacts.
    Run { config: PathBuf },
    /// Refinement study against the scenario oracle.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Run a property suite: geometry, trace, viscous, entropy, contraction, limit or all.
    Verify { suite: String },
    /// Distance between viscous and hyperbolic runs over a list of viscosities.
    Limit {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
        eps: Vec<f64>,
    },
}

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::Oracle(_) | Error::InvalidQuery(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Csv { .. } => EXIT_CONFIG,
        _ => EXIT_CHECK,
    }
}

fn execute(cmd: Command) -> Result<bool, Error> {
    let out = harness::output_root();
    match cmd {
        Command::Run { config } => {
            let cfg = harness::load_config(&config)?;
            let art = harness::run(&cfg, &out)?;
            println!("{}", art.dir.display());
            if let harness::RunStatus::Aborted { reason } = &art.status {
                eprintln!("run aborted: {reason}");
            }
            Ok(art.completed())
        }
        Command::Convergence { config, levels } => {
            let cfg = harness::load_config(&config)?;
            let (table, path) = harness::convergence(&cfg, levels, &out)?;
            print!("{}", table.to_csv());
            println!("{}", path.display());
            Ok(true)
        }
        Command::Verify { suite } => {
            let selection: Selection = suite.parse()?;
            let report = harness::verify(selection);
            println!("{report}");
            Ok(report.passed())
        }
        Command::Limit { config, eps } => {
            let cfg = harness::load_config(&config)?;
            let (table, path) = harness::limit(&cfg, &eps, &out)?;
            print!("{}", harness::study::limit_csv(&table));
            println!("{}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
