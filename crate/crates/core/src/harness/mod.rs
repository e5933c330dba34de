//! Experiment configs, sweeps, output files and the named scenarios.

pub mod config;
pub mod emit;
pub mod experiments;
pub mod scenarios;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat, Schedule};
pub use emit::{out_dir, sha256_hex, to_csv, write_outputs, FileEntry, Manifest};
pub use experiments::{
    run_approx_experiment, run_experiment, run_kernel_experiment, run_rate_experiment, run_sharpness_experiment,
    run_skew_experiment, ApproxRow, ExperimentOutput, KernelRow, RateRow, RateSeries, SharpRow, SkewRow,
};
pub use scenarios::{run_scenario, scenario_ids, scenario_title, ScenarioOutcome, PI_FRAC_80};
