//! Configuration ingestion, run persistence, refinement studies and the
//! named property checks behind `verify`.

pub mod artifact;
pub mod config;
pub mod scenarios;
pub mod study;
pub mod verify;

use std::path::PathBuf;

pub use artifact::{run, RunArtifact, RunStatus, SolverKind};
pub use config::{load_config, parse_config, OracleSpec, RunConfig};
pub use study::{convergence, convergence_table, limit, RatesTable};
pub use verify::{verify, verify_with, Check, Report, Selection, Suite};

/// Environment variable naming the output root.
pub const OUTPUT_ENV: &str = "BVLAB_OUTPUT";

/// `$BVLAB_OUTPUT`, or `./runs` when unset.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from)
}
