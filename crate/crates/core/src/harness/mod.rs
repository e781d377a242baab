//! Misreport generation, regret estimation and experiment orchestration.

pub mod config;
pub mod deviation;
pub mod experiment;
pub mod regret;
pub mod seed;
pub mod stats;

pub use config::ExperimentConfig;
pub use deviation::{gen_deviation, gen_deviations, DeviationReport, DEFAULT_SWAP_RANK_P};
pub use experiment::{build_instances, run_experiment, run_on_instances, ExperimentReport, Optimum, RegretRecord, RunRecord};
pub use regret::{deviation_gain, mechanism_seed, regret_estimate, run_order, RegretConfig, RegretEstimate};
pub use stats::{spearman, MeanCi};
