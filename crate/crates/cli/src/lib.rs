//! Config-driven runner for the uniform-equicontinuity analyses, with
//! deterministic JSON reports and CSV curve output.

pub mod config;
pub mod describe;
pub mod error;
pub mod matrix;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use describe::describe;
pub use error::CliError;
pub use report::{emit_curves, AnalysisReport};
pub use runner::{execute, run};
