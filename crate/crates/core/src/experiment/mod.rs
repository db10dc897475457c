//! Replicated simulation harness: configuration, episodes, aggregation,
//! presets and result files.

mod aggregate;
mod config;
mod output;
mod presets;
mod runner;

pub use aggregate::{AggregateCurve, AggregatePoint, Z95};
pub use config::{geometric_checkpoints, EnvSpec, ExperimentConfig, PolicySpec, FULL_TRACE_LIMIT};
pub use output::{
    format_number, read_aggregates_csv, read_configs, read_traces_csv, write_config, write_results,
    AggregateRow, CurveRecord, OutputFormat, TraceRecord, TraceRow, AGGREGATE_HEADER, TRACE_HEADER,
};
pub use presets::{preset, preset_names, Scale};
pub use runner::{
    run_episode, run_episode_with, run_experiment, run_paired_comparison, run_timed_episode,
    ExperimentResult, PairedResult, RegretTrace, TimingProfile, TracePoint,
};
