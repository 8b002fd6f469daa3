//! Benchmark harness for the iterative solvers in `illposed-core`: experiment configs,
//! grid ingestion, synthetic data, the standard tables and report output.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod grid;
pub mod harness;
pub mod report;
pub mod synth;

pub use config::{ExperimentConfig, Kind, Overrides};
pub use error::{BenchError, Result};
pub use harness::{run_experiment, run_regularize, run_table1_analog, run_table2, Table1Options, Table2Options};
pub use report::OutputFormat;
