//! Reproducibility experiments: iteration matrices, summary statistics,
//! Welch's t-test, and the inter-host variation analysis.

mod runner;
mod stats;

pub use runner::{
    load_plan, render_step_stats, run_experiment, ruleset_for, variation_report, ExperimentError,
    ExperimentMatrix, ExperimentPlan, IterationResult, ProfileTable, StepRow, StepStatsReport,
    VariationEntry, VariationOutcome, VariationReport, DEFAULT_EXTENSION_CAP,
    PLAN_SCHEMA_VERSION,
};
pub use stats::{
    ln_gamma, reg_inc_beta, student_t_two_tailed, summarize, welch_t_test, StatsError,
    SummaryStats, WelchResult,
};
