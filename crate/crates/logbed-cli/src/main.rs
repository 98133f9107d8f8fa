//! Command-line entry point for the logbed breach simulator.
//!
//! Exit codes: 0 on success, 1 on user or validation errors, 2 on internal
//! errors. Every command that writes data first writes a reproduction
//! manifest naming the exact scenario fingerprint, seed, and tool version.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use logbed::adversary::{
    generate_chain_spaced, load_chain, save_chain, tactic_coverage, validate_chain, AttackChain,
    Tactic,
};
use logbed::detection::{
    apply_rules, attribute_alerts, detected_steps, load_ruleset, per_rule_counts,
};
use logbed::experiment::{
    load_plan, render_step_stats, run_experiment, variation_report, ExperimentPlan,
};
use logbed::logemit::{export_dataset, import_dataset, run_fingerprint, strip_causes};
use logbed::pipeline::{
    exemplary_chain_for, run_simulation, scenario_digraph, seed_identity, RunError,
};
use logbed::scenario::{default_scenario, load_scenario, validate_scenario, ScenarioConfig};
use logbed::selftest::{run_check, run_selftests};
use logbed::simkernel::RngStream;

#[derive(Parser)]
#[command(
    name = "logbed",
    version = logbed::VERSION,
    about = "Deterministic company-network breach simulation and log dataset generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario file.
    Validate(ValidateArgs),
    /// Run one simulation and export the dataset.
    Run(RunArgs),
    /// Generate a pseudo-random valid attack chain.
    ChainGen(ChainGenArgs),
    /// Apply a ruleset to an exported dataset.
    Detect(DetectArgs),
    /// Run a reproducibility experiment matrix.
    Experiment(ExperimentArgs),
    /// Run the built-in verification suite.
    Selftest(SelftestArgs),
    /// Rewrite a dataset canonically, with or without ground truth.
    Export(ExportArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file to check.
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Root seed for the run.
    #[arg(long)]
    seed: u64,
    /// Scenario file; omitted = built-in default scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Chain file to execute.
    #[arg(long, conflicts_with = "exemplary")]
    chain: Option<PathBuf>,
    /// Execute the built-in exemplary kill chain.
    #[arg(long)]
    exemplary: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChainGenArgs {
    #[arg(long)]
    seed: u64,
    /// Number of attack steps.
    #[arg(long)]
    length: usize,
    /// Scenario file providing targets and step spacing.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output chain file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    /// Exported dataset (line-delimited).
    #[arg(long)]
    dataset: PathBuf,
    /// Ground-truth sidecar; enables per-step attribution.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Ruleset file; omitted = built-in default ruleset.
    #[arg(long)]
    ruleset: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment plan file; omitted = the published default design.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Root seed when no plan file is given.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run a single named check.
    #[arg(long)]
    check: Option<String>,
    /// Scenario file; omitted = built-in default scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Dataset to rewrite.
    #[arg(long)]
    dataset: PathBuf,
    /// Ground-truth sidecar of the input dataset.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output dataset path.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the ground truth of the output (requires --truth).
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

/// A failed invocation with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn user(message: impl ToString) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Run(args) => cmd_run(args),
        Command::ChainGen(args) => cmd_chain_gen(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Selftest(args) => cmd_selftest(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// Reproduction manifest written next to every data output.
#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    scenario_fingerprint: &'a str,
    seed_identity: &'a str,
    root_seed: u64,
}

fn write_manifest(
    dir: &Path,
    command: &str,
    fingerprint: &str,
    identity: &str,
    root_seed: u64,
) -> CliResult {
    let manifest = Manifest {
        schema_version: 1,
        tool: "logbed",
        version: logbed::VERSION,
        command,
        scenario_fingerprint: fingerprint,
        seed_identity: identity,
        root_seed,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(Failure::internal)?;
    std::fs::write(dir.join("manifest.json"), text).map_err(Failure::user)?;
    Ok(())
}

fn load_scenario_arg(path: &Option<PathBuf>) -> Result<ScenarioConfig, Failure> {
    match path {
        Some(p) => load_scenario(p).map_err(Failure::user),
        None => Ok(default_scenario()),
    }
}

fn ensure_out_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(Failure::user)
}

fn cmd_validate(args: ValidateArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.scenario).map_err(Failure::user)?;
    let cfg = logbed::scenario::parse_scenario_unchecked(&text).map_err(Failure::user)?;
    let violations = validate_scenario(&cfg);
    if violations.is_empty() {
        println!("ok: scenario is valid");
        Ok(())
    } else {
        for v in &violations {
            println!("{v}");
        }
        Err(Failure::user(format!("{} violation(s)", violations.len())))
    }
}

fn cmd_run(args: RunArgs) -> CliResult {
    let scenario = load_scenario_arg(&args.scenario)?;
    let chain: AttackChain = match (&args.chain, args.exemplary) {
        (Some(path), _) => load_chain(path).map_err(Failure::user)?,
        (None, true) => exemplary_chain_for(&scenario).map_err(Failure::user)?,
        (None, false) => {
            return Err(Failure::user("pass --chain FILE or --exemplary"));
        }
    };
    let digraph = scenario_digraph(&scenario).map_err(Failure::user)?;
    validate_chain(&chain, &digraph).map_err(Failure::user)?;

    let stream = RngStream::derive(args.seed, &["run"]).map_err(Failure::user)?;
    let identity = seed_identity(&stream);
    let fingerprint = run_fingerprint(&scenario, &identity);

    ensure_out_dir(&args.out)?;
    write_manifest(&args.out, "run", &fingerprint, &identity, args.seed)?;

    let output = run_simulation(&scenario, &chain, &stream).map_err(|e| match e {
        RunError::Prereq(_) | RunError::Kernel(_) => Failure::internal(e),
        other => Failure::user(other),
    })?;
    export_dataset(
        &output.dataset,
        args.out.join("dataset.jsonl"),
        Some(&args.out.join("ground_truth.json")),
    )
    .map_err(Failure::internal)?;
    println!(
        "wrote {} events (fingerprint {})",
        output.dataset.events.len(),
        output.dataset.fingerprint
    );
    Ok(())
}

fn coverage_summary(chain: &AttackChain) -> String {
    let steps: Vec<_> = chain.entries.iter().map(|e| e.step).collect();
    let matrix = tactic_coverage(&steps);
    let union = matrix.union();
    let covered: Vec<&str> = Tactic::ALL
        .iter()
        .zip(union.iter())
        .filter(|(_, c)| **c)
        .map(|(t, _)| t.name())
        .collect();
    format!(
        "tactic coverage: {}/14 ({})",
        covered.len(),
        covered.join(", ")
    )
}

fn cmd_chain_gen(args: ChainGenArgs) -> CliResult {
    let scenario = load_scenario_arg(&args.scenario)?;
    let digraph = scenario_digraph(&scenario).map_err(Failure::user)?;
    let targets: Vec<String> = scenario.client_ids().iter().map(|s| s.to_string()).collect();
    let stream = RngStream::derive(args.seed, &["chain-gen"]).map_err(Failure::user)?;
    let chain = generate_chain_spaced(
        &digraph,
        &stream,
        args.length,
        &targets,
        scenario.attack_idle_seconds,
    )
    .map_err(Failure::user)?;
    validate_chain(&chain, &digraph).map_err(Failure::internal)?;
    save_chain(&chain, &args.out).map_err(Failure::user)?;
    println!("wrote {} step(s) to {}", chain.len(), args.out.display());
    println!("{}", coverage_summary(&chain));
    Ok(())
}

fn cmd_detect(args: DetectArgs) -> CliResult {
    let dataset =
        import_dataset(&args.dataset, args.truth.as_deref()).map_err(Failure::user)?;
    let rules = match &args.ruleset {
        Some(path) => load_ruleset(path).map_err(Failure::user)?,
        None => logbed::detection::default_ruleset(),
    };
    ensure_out_dir(&args.out)?;

    let alerts = apply_rules(&dataset, &rules);
    let mut lines = String::new();
    for alert in &alerts {
        lines.push_str(&serde_json::to_string(alert).map_err(Failure::internal)?);
        lines.push('\n');
    }
    std::fs::write(args.out.join("alerts.jsonl"), lines).map_err(Failure::user)?;

    let rule_totals = per_rule_counts(&alerts);
    std::fs::write(
        args.out.join("per_rule_counts.json"),
        serde_json::to_string_pretty(&rule_totals).map_err(Failure::internal)?,
    )
    .map_err(Failure::user)?;

    println!("{} alert(s) from {} rule type(s)", alerts.len(), rule_totals.len());
    match &dataset.ground_truth {
        Some(truth) => {
            let counts = attribute_alerts(&alerts, truth);
            let detected = detected_steps(&counts);
            #[derive(Serialize)]
            struct Attribution<'a> {
                per_step: &'a [u64],
                detected_steps: usize,
            }
            std::fs::write(
                args.out.join("attribution.json"),
                serde_json::to_string_pretty(&Attribution {
                    per_step: &counts,
                    detected_steps: detected,
                })
                .map_err(Failure::internal)?,
            )
            .map_err(Failure::user)?;
            println!("detected attack steps: {detected}");
        }
        None => {
            eprintln!("warning: no ground-truth sidecar given; skipping per-step attribution");
        }
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let plan: ExperimentPlan = match (&args.plan, args.seed) {
        (Some(path), _) => load_plan(path).map_err(Failure::user)?,
        (None, Some(seed)) => ExperimentPlan::default_plan(seed),
        (None, None) => return Err(Failure::user("pass --plan FILE or --seed SEED")),
    };
    ensure_out_dir(&args.out)?;
    let identity = format!("{}/experiment", plan.root_seed);
    let fingerprint = run_fingerprint(&plan.scenario, &identity);
    write_manifest(&args.out, "experiment", &fingerprint, &identity, plan.root_seed)?;

    let matrix = run_experiment(&plan).map_err(Failure::user)?;
    std::fs::write(
        args.out.join("results.json"),
        serde_json::to_string_pretty(&matrix).map_err(Failure::internal)?,
    )
    .map_err(Failure::user)?;

    let stats = render_step_stats(&matrix, &plan).map_err(Failure::user)?;
    std::fs::write(
        args.out.join("step_stats.json"),
        serde_json::to_string_pretty(&stats).map_err(Failure::internal)?,
    )
    .map_err(Failure::user)?;
    std::fs::write(args.out.join("step_stats.txt"), stats.to_text()).map_err(Failure::user)?;

    if plan.profiles.len() >= 2 {
        let variation = variation_report(&matrix, &plan).map_err(Failure::user)?;
        std::fs::write(
            args.out.join("variation.json"),
            serde_json::to_string_pretty(&variation).map_err(Failure::internal)?,
        )
        .map_err(Failure::user)?;
    }

    println!(
        "{} iteration(s) across {} profile(s); reports in {}",
        matrix.results.len(),
        plan.profiles.len(),
        args.out.display()
    );
    print!("{}", stats.to_text());
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> CliResult {
    let scenario = load_scenario_arg(&args.scenario)?;
    let checks = match &args.check {
        Some(name) => {
            let check = run_check(&scenario, name)
                .ok_or_else(|| Failure::user(format!("unknown check {name:?}")))?;
            vec![check]
        }
        None => run_selftests(&scenario).checks,
    };
    let mut all_passed = true;
    for check in &checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        println!("{status}  {:<20} {}", check.name, check.detail);
        all_passed &= check.passed;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure::user("self-test failed"))
    }
}

fn cmd_export(args: ExportArgs) -> CliResult {
    let dataset =
        import_dataset(&args.dataset, args.truth.as_deref()).map_err(Failure::user)?;
    if args.truth_out.is_some() && args.truth.is_none() {
        return Err(Failure::user("--truth-out requires --truth"));
    }
    let (dataset, truth_out) = match &args.truth_out {
        Some(path) => (dataset, Some(path.clone())),
        None => (strip_causes(&dataset), None),
    };
    export_dataset(&dataset, &args.out, truth_out.as_deref()).map_err(Failure::user)?;
    println!(
        "wrote {} events to {}{}",
        dataset.events.len(),
        args.out.display(),
        if truth_out.is_some() {
            " (with ground truth)"
        } else {
            " (labels stripped)"
        }
    );
    Ok(())
}
