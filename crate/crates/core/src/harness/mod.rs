//! The δ-sweep convergence study: configuration, error measurement, slope fits and reports.

pub mod config;
pub mod output;
pub mod study;

pub use config::{parse_config, StudyConfig};
pub use output::{emit_outputs, parse_csv, write_csv};
pub use study::{fit_slope, measure_errors, run_study, ConvergenceReport, ErrorRow, SlopeFit};
