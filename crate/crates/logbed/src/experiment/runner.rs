//! The reproducibility harness: seeded iteration matrices over host profiles
//! and logging configurations, step-statistics reports, and the inter-host
//! variation analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AttackChain, StepExecution};
use crate::detection::{
    apply_rules, attribute_alerts, detected_steps, per_rule_counts, DetectionRule, RulesetError,
};
use crate::logemit::{assemble_dataset, emit_attack_events, loss_free_bundle};
use crate::pipeline::{run_simulation, RunError};
use crate::scenario::{HostProfile, LoggingConfig, LoggingProfile, ScenarioConfig};
use crate::simkernel::RngStream;

use super::stats::{summarize, welch_t_test, StatsError, SummaryStats, WelchResult};

/// Plan file schema version.
pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment plan is invalid: {0}")]
    BadPlan(String),
    #[error("failed to read plan: {0}")]
    Io(#[from] std::io::Error),
    #[error("plan file does not parse: {0}")]
    Parse(String),
    #[error("plan declares schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("iteration (profile {profile}, logging {logging}, iteration {iteration}) failed: {source}")]
    Iteration {
        profile: String,
        logging: LoggingProfile,
        iteration: usize,
        source: RunError,
    },
    #[error(transparent)]
    Ruleset(#[from] RulesetError),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error(transparent)]
    Chain(#[from] crate::adversary::ChainError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("results matrix is empty; nothing to render")]
    EmptyMatrix,
}

/// Iteration cap for the variation analysis extension.
pub const DEFAULT_EXTENSION_CAP: usize = 200;

/// Full description of a reproducibility experiment.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub scenario: ScenarioConfig,
    /// Iterations per (profile, logging) cell.
    pub iterations: usize,
    pub profiles: Vec<HostProfile>,
    pub logging_profiles: Vec<LoggingProfile>,
    pub root_seed: u64,
    pub chain: AttackChain,
    pub alpha: f64,
    /// Iterations per profile used by the variation analysis.
    pub extension_cap: usize,
}

impl ExperimentPlan {
    /// The published experiment design: ten iterations of the exemplary kill
    /// chain under both logging configurations on two host profiles that
    /// differ only in their packet drop rate.
    pub fn default_plan(root_seed: u64) -> Self {
        let scenario = crate::scenario::default_scenario();
        let chain = crate::pipeline::exemplary_chain_for(&scenario).expect("default hosts");
        Self {
            scenario,
            iterations: 10,
            profiles: vec![
                HostProfile {
                    name: "host-a".to_owned(),
                    drop_rate: 0.0005,
                },
                HostProfile {
                    name: "host-b".to_owned(),
                    drop_rate: 0.003,
                },
            ],
            logging_profiles: vec![LoggingProfile::Default, LoggingProfile::BestPractice],
            root_seed,
            chain,
            alpha: 0.05,
            extension_cap: DEFAULT_EXTENSION_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.iterations < 2 {
            return Err(ExperimentError::BadPlan(
                "iterations must be at least 2 for standard deviations to exist".into(),
            ));
        }
        if self.profiles.is_empty() || self.logging_profiles.is_empty() {
            return Err(ExperimentError::BadPlan(
                "at least one host profile and one logging profile are required".into(),
            ));
        }
        let names: BTreeSet<&str> = self.profiles.iter().map(|p| p.name.as_str()).collect();
        if names.len() != self.profiles.len() {
            return Err(ExperimentError::BadPlan("profile names must be unique".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ExperimentError::BadPlan("alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    schema_version: u32,
    #[serde(default = "default_iterations")]
    iterations: usize,
    root_seed: u64,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default = "default_cap")]
    extension_cap: usize,
    #[serde(default = "default_logging")]
    logging_profiles: Vec<LoggingProfile>,
    profiles: Vec<HostProfile>,
    /// Path to a scenario file; omitted = built-in default scenario.
    scenario_path: Option<String>,
    /// Path to a chain file; omitted = exemplary kill chain.
    chain_path: Option<String>,
}

fn default_iterations() -> usize {
    10
}
fn default_alpha() -> f64 {
    0.05
}
fn default_cap() -> usize {
    DEFAULT_EXTENSION_CAP
}
fn default_logging() -> Vec<LoggingProfile> {
    vec![LoggingProfile::Default, LoggingProfile::BestPractice]
}

/// Loads an experiment plan file; relative paths inside it resolve against
/// the plan file's directory.
pub fn load_plan(path: impl AsRef<Path>) -> Result<ExperimentPlan, ExperimentError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let file: PlanFile = toml::from_str(&text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
    if file.schema_version != PLAN_SCHEMA_VERSION {
        return Err(ExperimentError::SchemaVersion {
            found: file.schema_version,
            expected: PLAN_SCHEMA_VERSION,
        });
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let scenario = match &file.scenario_path {
        Some(p) => crate::scenario::load_scenario(base.join(p))?,
        None => crate::scenario::default_scenario(),
    };
    let chain = match &file.chain_path {
        Some(p) => crate::adversary::load_chain(base.join(p))?,
        None => crate::pipeline::exemplary_chain_for(&scenario)?,
    };
    let plan = ExperimentPlan {
        scenario,
        iterations: file.iterations,
        profiles: file.profiles,
        logging_profiles: file.logging_profiles,
        root_seed: file.root_seed,
        chain,
        alpha: file.alpha,
        extension_cap: file.extension_cap,
    };
    plan.validate()?;
    Ok(plan)
}

/// Result of one experiment iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationResult {
    pub profile: String,
    pub logging: LoggingProfile,
    pub iteration: usize,
    pub fingerprint: String,
    pub per_rule: BTreeMap<String, u64>,
    /// Attributed alert count per chain entry.
    pub per_step: Vec<u64>,
    pub detected_steps: usize,
}

/// All iteration results, ordered by (profile, logging, iteration).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentMatrix {
    pub results: Vec<IterationResult>,
}

impl ExperimentMatrix {
    pub fn cell(&self, profile: &str, logging: LoggingProfile) -> Vec<&IterationResult> {
        self.results
            .iter()
            .filter(|r| r.profile == profile && r.logging == logging)
            .collect()
    }

    /// Per-iteration counts of one rule in one cell.
    pub fn rule_counts(&self, profile: &str, logging: LoggingProfile, rule: &str) -> Vec<f64> {
        self.cell(profile, logging)
            .iter()
            .map(|r| *r.per_rule.get(rule).unwrap_or(&0) as f64)
            .collect()
    }

    pub fn rule_names(&self) -> BTreeSet<String> {
        self.results
            .iter()
            .flat_map(|r| r.per_rule.keys().cloned())
            .collect()
    }
}

/// The detection rules a scenario selects (its override or the built-in set).
pub fn ruleset_for(scenario: &ScenarioConfig) -> Result<Vec<DetectionRule>, RulesetError> {
    match &scenario.ruleset {
        Some(path) => crate::detection::load_ruleset(path),
        None => Ok(crate::detection::default_ruleset()),
    }
}

fn scenario_variant(
    base: &ScenarioConfig,
    profile: &HostProfile,
    logging: LoggingProfile,
) -> ScenarioConfig {
    let mut scenario = base.clone();
    scenario.host_profile = profile.clone();
    scenario.logging = LoggingConfig::for_profile(logging);
    scenario
}

/// Runs the full iteration matrix. Each iteration seeds its run stream from
/// `(root_seed, "experiment", profile, logging, iteration)`, so the matrix is
/// a pure function of the plan.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentMatrix, ExperimentError> {
    plan.validate()?;
    let rules = ruleset_for(&plan.scenario)?;
    let mut results = Vec::new();
    for profile in &plan.profiles {
        for &logging in &plan.logging_profiles {
            let scenario = scenario_variant(&plan.scenario, profile, logging);
            for iteration in 0..plan.iterations {
                let stream = RngStream::derive(
                    plan.root_seed,
                    &[
                        "experiment",
                        &profile.name,
                        &logging.to_string(),
                        &iteration.to_string(),
                    ],
                )
                .expect("non-empty labels");
                let output =
                    run_simulation(&scenario, &plan.chain, &stream).map_err(|source| {
                        ExperimentError::Iteration {
                            profile: profile.name.clone(),
                            logging,
                            iteration,
                            source,
                        }
                    })?;
                let alerts = apply_rules(&output.dataset, &rules);
                let truth = output.dataset.ground_truth.as_ref().expect("run attaches truth");
                let per_step = attribute_alerts(&alerts, truth);
                results.push(IterationResult {
                    profile: profile.name.clone(),
                    logging,
                    iteration,
                    fingerprint: output.dataset.fingerprint.clone(),
                    per_rule: per_rule_counts(&alerts),
                    detected_steps: detected_steps(&per_step),
                    per_step,
                });
            }
        }
    }
    Ok(ExperimentMatrix { results })
}

/// One row of the step-statistics table: per logging profile the mean and SD
/// of attributed alert counts over the cell's iterations.
#[derive(Debug, Clone, Serialize)]
pub struct StepRow {
    pub label: String,
    pub by_logging: BTreeMap<LoggingProfile, SummaryStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileTable {
    pub profile: String,
    pub steps: Vec<StepRow>,
    pub detected: StepRow,
}

/// Step-statistics report over the whole matrix (one table per host profile).
#[derive(Debug, Clone, Serialize)]
pub struct StepStatsReport {
    pub tables: Vec<ProfileTable>,
}

/// Builds the per-step alert statistics report: for every chain entry the
/// sample mean and SD of attributed alerts per logging configuration, plus
/// the detected-step summary row.
pub fn render_step_stats(
    matrix: &ExperimentMatrix,
    plan: &ExperimentPlan,
) -> Result<StepStatsReport, ExperimentError> {
    if matrix.results.is_empty() {
        return Err(ExperimentError::EmptyMatrix);
    }
    let mut tables = Vec::new();
    for profile in &plan.profiles {
        let mut steps = Vec::new();
        for (idx, entry) in plan.chain.entries.iter().enumerate() {
            let mut by_logging = BTreeMap::new();
            for &logging in &plan.logging_profiles {
                let samples: Vec<f64> = matrix
                    .cell(&profile.name, logging)
                    .iter()
                    .map(|r| r.per_step.get(idx).copied().unwrap_or(0) as f64)
                    .collect();
                by_logging.insert(logging, summarize(&samples)?);
            }
            steps.push(StepRow {
                label: entry.label(idx),
                by_logging,
            });
        }
        let mut detected = BTreeMap::new();
        for &logging in &plan.logging_profiles {
            let samples: Vec<f64> = matrix
                .cell(&profile.name, logging)
                .iter()
                .map(|r| r.detected_steps as f64)
                .collect();
            detected.insert(logging, summarize(&samples)?);
        }
        tables.push(ProfileTable {
            profile: profile.name.clone(),
            steps,
            detected: StepRow {
                label: "detected attack steps".to_owned(),
                by_logging: detected,
            },
        });
    }
    Ok(StepStatsReport { tables })
}

impl StepStatsReport {
    /// Plain-text rendering, one block per host profile.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for table in &self.tables {
            let _ = writeln!(out, "profile: {}", table.profile);
            let mut headers = String::new();
            if let Some(first) = table.steps.first() {
                for logging in first.by_logging.keys() {
                    let _ = write!(headers, "  x({logging})      s({logging})");
                }
            }
            let _ = writeln!(out, "{:<34}{}", "attack step", headers);
            for row in table.steps.iter().chain(std::iter::once(&table.detected)) {
                let _ = write!(out, "{:<34}", row.label);
                for stats in row.by_logging.values() {
                    let sd = stats.sd.unwrap_or(f64::NAN);
                    let _ = write!(out, "  {:>10.3} {:>10.3}", stats.mean, sd);
                }
                let _ = writeln!(out);
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Outcome of the variation analysis for one rule.
#[derive(Debug, Clone, Serialize)]
pub enum VariationOutcome {
    /// Welch's t-test ran; rejection means the mean alert count differs
    /// between the two host profiles.
    Tested {
        #[serde(flatten)]
        result: WelchResult,
        reject: bool,
    },
    /// Even at the iteration cap both samples were constant, so the test
    /// statistic is undefined.
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationEntry {
    pub rule: String,
    pub profile_a: String,
    pub profile_b: String,
    /// Iterations per profile in the extended sample.
    pub iterations: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub outcome: VariationOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationReport {
    pub alpha: f64,
    pub entries: Vec<VariationEntry>,
}

/// Chain entries whose loss-free bundle raises at least one alert of `rule`.
fn triggering_entries(
    chain: &AttackChain,
    scenario: &ScenarioConfig,
    rule: &DetectionRule,
) -> Vec<usize> {
    let lateral = scenario.client_ids().get(1).copied().unwrap_or("client2").to_owned();
    chain
        .entries
        .iter()
        .enumerate()
        .filter(|(_, entry)| {
            let probe = assemble_dataset(
                String::new(),
                vec![loss_free_bundle(entry.step, entry.phase, &entry.target, &lateral)],
                None,
            );
            !apply_rules(&probe, std::slice::from_ref(rule)).is_empty()
        })
        .map(|(i, _)| i)
        .collect()
}

/// Analyzes inter-profile variation: selects every rule whose alert count has
/// nonzero SD anywhere in the matrix, re-runs just that rule's triggering
/// chain entries for `extension_cap` iterations per profile (the alert counts
/// elsewhere are constant by construction), and tests mean equality between
/// the first two host profiles with Welch's t-test at the plan's alpha.
pub fn variation_report(
    matrix: &ExperimentMatrix,
    plan: &ExperimentPlan,
) -> Result<VariationReport, ExperimentError> {
    if plan.profiles.len() < 2 {
        return Err(ExperimentError::BadPlan(
            "variation analysis needs at least two host profiles".into(),
        ));
    }
    let rules = ruleset_for(&plan.scenario)?;
    let (profile_a, profile_b) = (&plan.profiles[0], &plan.profiles[1]);

    let mut entries = Vec::new();
    for rule_name in matrix.rule_names() {
        let mut varies = false;
        for profile in &plan.profiles {
            for &logging in &plan.logging_profiles {
                let counts = matrix.rule_counts(&profile.name, logging, &rule_name);
                if counts.len() >= 2 {
                    let stats = summarize(&counts)?;
                    if stats.sd.unwrap_or(0.0) > 0.0 {
                        varies = true;
                    }
                }
            }
        }
        if !varies {
            continue;
        }
        let rule = rules
            .iter()
            .find(|r| r.name == rule_name)
            .expect("matrix rules come from the ruleset");
        let triggers = triggering_entries(&plan.chain, &plan.scenario, rule);

        let extend = |profile: &HostProfile| -> Vec<f64> {
            let scenario = scenario_variant(&plan.scenario, profile, LoggingProfile::BestPractice);
            (0..plan.extension_cap)
                .map(|k| {
                    let mut count = 0usize;
                    for &entry_index in &triggers {
                        let entry = &plan.chain.entries[entry_index];
                        let stream = RngStream::derive(
                            plan.root_seed,
                            &["variation", &rule_name, &profile.name, &k.to_string()],
                        )
                        .expect("non-empty labels");
                        let exec = StepExecution {
                            entry_index,
                            step: entry.step,
                            phase: entry.phase,
                            target: entry.target.clone(),
                        };
                        let events = emit_attack_events(&exec, &scenario, 0, &stream);
                        let probe = assemble_dataset(String::new(), vec![events], None);
                        count += apply_rules(&probe, std::slice::from_ref(rule)).len();
                    }
                    count as f64
                })
                .collect()
        };

        let a = extend(profile_a);
        let b = extend(profile_b);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let outcome = match welch_t_test(&a, &b, plan.alpha) {
            Ok(result) => VariationOutcome::Tested {
                reject: result.reject(),
                result,
            },
            Err(StatsError::DegenerateSamples) => VariationOutcome::Degenerate,
            Err(e) => return Err(e.into()),
        };
        entries.push(VariationEntry {
            rule: rule_name,
            profile_a: profile_a.name.clone(),
            profile_b: profile_b.name.clone(),
            iterations: plan.extension_cap,
            mean_a: mean(&a),
            mean_b: mean(&b),
            outcome,
        });
    }
    Ok(VariationReport {
        alpha: plan.alpha,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan(seed: u64) -> ExperimentPlan {
        let mut plan = ExperimentPlan::default_plan(seed);
        plan.iterations = 2;
        // keep unit tests quick; acceptance exercises the full design
        plan.scenario.run_seconds = 3600;
        plan.extension_cap = 40;
        plan
    }

    #[test]
    fn matrix_has_profile_x_logging_x_iteration_results() {
        let plan = small_plan(5);
        let matrix = run_experiment(&plan).unwrap();
        assert_eq!(matrix.results.len(), 2 * 2 * 2);
        assert_eq!(matrix.cell("host-a", LoggingProfile::Default).len(), 2);
    }

    #[test]
    fn rerun_is_identical() {
        let plan = small_plan(6);
        let a = run_experiment(&plan).unwrap();
        let b = run_experiment(&plan).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn detected_steps_are_four_and_six(){
        let plan = small_plan(7);
        let matrix = run_experiment(&plan).unwrap();
        for r in &matrix.results {
            let expected = match r.logging {
                LoggingProfile::Default => 4,
                LoggingProfile::BestPractice => 6,
            };
            assert_eq!(r.detected_steps, expected, "{r:?}");
        }
    }

    #[test]
    fn step_stats_errors_on_empty_matrix() {
        let plan = small_plan(8);
        let empty = ExperimentMatrix { results: vec![] };
        assert!(matches!(
            render_step_stats(&empty, &plan),
            Err(ExperimentError::EmptyMatrix)
        ));
    }

    #[test]
    fn plan_validation_catches_bad_iteration_count() {
        let mut plan = small_plan(9);
        plan.iterations = 1;
        assert!(matches!(plan.validate(), Err(ExperimentError::BadPlan(_))));
    }
}
