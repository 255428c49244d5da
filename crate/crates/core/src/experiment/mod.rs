//! Configuration, run orchestration, persistence and scaling fits.

pub mod config;
pub mod fit;
pub mod output;
pub mod run;

pub use config::{parse_config, RunConfig};
pub use fit::{fit_scaling, FitModel, FitResult};
pub use output::{read_snapshot, write_snapshot, RunSummary, Snapshot};
pub use run::{run_experiment, Command, RunPaths};
