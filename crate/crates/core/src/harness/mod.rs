//! Synthetic instances, the agent/environment loop, metrics, and
//! multi-seed experiments with on-disk results.

mod episode;
mod experiment;
mod instance;

pub use episode::{run_episode, true_optimum, Checkpoint, EpisodeResult, MetricsSeries, METRICS_HEADER};
pub use experiment::{
    aggregate, derive_seed, run_experiment, run_experiment_with_jobs, run_seed, summary_csv, AgentKind,
    ExperimentConfig, ExperimentResult, SeedRun, Stream, SummaryRow, CONFIG_FIELDS,
};
pub use instance::{generate_instance, generate_instance_with_report, GenerationReport};
