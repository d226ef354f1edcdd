//! Experiment harness around `gpsmbo-core`: configuration files, batch runs
//! on a worker pool, CSV outputs, the distance study, the EA tuning grid,
//! significance tests and SVG charts.

pub mod config;
pub mod distance_study;
pub mod experiment;
pub mod io;
pub mod plots;
pub mod stats;
pub mod tuning;

pub use config::{ExperimentConfig, ProblemEntry};
pub use experiment::{load_study, run_experiment, write_study, RunOptions, RunResult, StudyResult};
