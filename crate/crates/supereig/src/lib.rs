//! File formats and the experiment runner behind the `supereig` binary.

pub mod error;
pub mod experiment;
pub mod meshio;
pub mod report;

pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, ExperimentConfig, Source};
