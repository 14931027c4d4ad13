//! Experiment harness: configs, paired replications, result files and
//! bound tables.
//!
//! Replication `i` uses seed `base_seed + i`. That seed draws the synthetic
//! instance, the reward coins (one stream per arm, so every algorithm pulling
//! arm `a` at step `t` sees the same bit) and the algorithms' exploration
//! coins.

mod bounds;
mod config;
mod detect;
mod output;
mod runner;

pub use bounds::{bounds_table, BoundRow};
pub use config::{AlgorithmSpec, EnvironmentSpec, ExperimentConfig, Keyword, PolicyOverrides, Tuning};
pub use detect::{detect_stream, parse_bits, read_bits};
pub use output::{emit_csv, emit_svg, render_svg, write_outputs};
pub use runner::{
    replication_instance, replication_seed, run_experiment, worker_count, AlgorithmSummary, Event, EventKind,
    RunSummary, THREADS_ENV,
};
