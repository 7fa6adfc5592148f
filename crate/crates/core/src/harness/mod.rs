//! Experiment driver: manifests, reference optima, comparison runs, grid
//! searches and validator suites.

pub mod config;
pub mod experiment;
pub mod reference;
pub mod validate;

pub use config::{AlgorithmGrid, ExperimentConfig, OneOrMany, ProblemSpec};
pub use experiment::{
    grid_search, read_history_csv, run_cell, run_experiment, summarize, write_history_csv,
    ExperimentReport,
};
pub use reference::{compute_reference_optimum, fixed_point_residual, ReferenceOptimum};
pub use validate::{validate, Suite, ValidateOptions, ValidationReport};
