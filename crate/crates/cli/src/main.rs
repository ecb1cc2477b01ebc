//! `procure`: generate instances, run the optimizers, and compare results.

mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use procure::bounds::x_bounds;
use procure::instancegen::{generate, GenSpec};
use procure::metrics::{complexity_report, coverage, hyperarea, Point};
use procure::moea::{run, Algorithm, ArchiveFile, RunConfig, Space};
use procure::simulation::{check_feasibility, divide, simulate, write_trace_tsv};
use procure::subproblem::{compare_with_oracle, SubproblemSpec, TabuConfig, TransformedProblem};
use procure::{Cents, ProcurementInstance, PurchasePlan};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "procure", version, about = "Budget-constrained medical supplies procurement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Run an optimizer and write its archive and manifest.
    Solve(SolveArgs),
    /// Simulate one purchase plan.
    Evaluate(EvaluateArgs),
    /// Hyperarea and coverage of two archives.
    Compare(CompareArgs),
    /// Check the subproblem solver against exhaustive enumeration.
    Oracle(OracleArgs),
    /// Complexity figures for an instance, plus archive metrics if given.
    Report(ReportArgs),
    /// Both algorithms in both spaces over several seeds, as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of common diseases.
    #[arg(long, default_value_t = 20)]
    m: usize,
    #[arg(long, default_value_t = 300)]
    supplies: usize,
    #[arg(long, default_value_t = 2000)]
    cases: u64,
    #[arg(long, default_value_t = 6.0)]
    avg_items: f64,
    #[arg(long, default_value_t = 5.0)]
    avg_alts: f64,
    #[arg(long, default_value_t = 1.3)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct Limits {
    /// Wall-clock limit in seconds.
    #[arg(long, required_unless_present = "max_evals")]
    time_limit: Option<f64>,
    #[arg(long)]
    max_evals: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = Algorithm::Nsga2)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = Space::Transformed)]
    space: Space,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    /// Evaluation threads; results do not depend on it.
    #[arg(long, env = "PROCURE_THREADS", default_value_t = 1)]
    threads: usize,
    /// Archive path; the manifest goes next to it.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// JSON array of purchase quantities, one per supply.
    #[arg(long, conflicts_with = "archive", required_unless_present = "archive")]
    plan: Option<PathBuf>,
    /// Take the plan from an archive entry instead.
    #[arg(long)]
    archive: Option<PathBuf>,
    #[arg(long, default_value_t = 0, requires = "archive")]
    entry: usize,
    /// Write a per-case TSV trace of the expected-count simulation.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Hyperarea reference point.
    #[arg(long = "ref", default_value = "0,0", value_parser = parse_point)]
    reference: Point,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Profile index: 0 for epidemic control, i for disease i.
    #[arg(long)]
    profile: usize,
    #[arg(long)]
    budget: i64,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(short, long)]
    input: PathBuf,
    archive: Option<PathBuf>,
    other: Option<PathBuf>,
    #[arg(long = "ref", default_value = "0,0", value_parser = parse_point)]
    reference: Point,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    #[arg(long, env = "PROCURE_THREADS", default_value_t = 1)]
    threads: usize,
    /// Keep every archive and manifest here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// CSV path; stdout if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Report(a) => cmd_report(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let spec = GenSpec {
        diseases: a.m,
        supplies: a.supplies,
        cases: a.cases,
        avg_items: a.avg_items,
        avg_alternatives: a.avg_alts,
        beta: a.beta,
        seed: a.seed,
        ..GenSpec::default()
    };
    let instance = generate(&spec)?;
    instance.save(&a.output)?;
    eprintln!(
        "wrote {} ({} diseases, {} supplies, budget {})",
        a.output.display(),
        instance.diseases.len(),
        instance.supplies.len(),
        instance.budget
    );
    print_json(&json!({
        "path": a.output,
        "diseases": instance.diseases.len(),
        "supplies": instance.supplies.len(),
        "budget_cents": instance.budget.get(),
    }))
}

fn run_config(
    algorithm: Algorithm,
    space: Space,
    limits: &Limits,
    seed: u64,
    pop: usize,
    threads: usize,
) -> RunConfig {
    RunConfig {
        algorithm,
        space,
        population: pop,
        time_limit: limits.time_limit,
        max_evaluations: limits.max_evals,
        seed,
        threads,
        ..RunConfig::default()
    }
}

/// Sibling path `<stem>.manifest.json`.
fn manifest_path(archive: &Path) -> PathBuf {
    let stem = archive.file_stem().map_or_else(|| "archive".into(), |s| s.to_string_lossy().into_owned());
    archive.with_file_name(format!("{stem}.manifest.json"))
}

/// Runs one configuration and writes its archive and manifest.
fn solve_to(instance: &ProcurementInstance, input: &Path, config: &RunConfig, output: &Path) -> Result<(ArchiveFile, f64)> {
    let started = manifest::unix_now();
    let clock = Instant::now();
    let outcome = run(instance, config).with_context(|| format!("{} {} run failed", config.algorithm, config.space))?;
    let file = outcome.to_file(config);
    file.save(output)?;
    let area = hyperarea(&file.entries.points(), (0.0, 0.0))?;
    let manifest = RunManifest::new(input, config, output, &manifest_path(output), started, clock.elapsed(), &outcome);
    manifest.save()?;
    eprintln!(
        "{} {} seed {}: {} evaluations, {} generations, {} archive entries, hyperarea {area}",
        config.algorithm,
        config.space,
        config.seed,
        outcome.evaluations,
        outcome.generations,
        file.entries.len()
    );
    Ok((file, area))
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let instance = ProcurementInstance::load(&a.input)?;
    let config = run_config(a.algorithm, a.space, &a.limits, a.seed, a.pop, a.threads);
    config.validate()?;
    let (file, area) = solve_to(&instance, &a.input, &config, &a.output)?;
    print_json(&json!({
        "hyperarea": area,
        "entries": file.entries.len(),
        "evaluations": file.evaluations,
        "archive": a.output,
        "manifest": manifest_path(&a.output),
    }))
}

fn load_plan(a: &EvaluateArgs) -> Result<PurchasePlan> {
    if let Some(path) = &a.plan {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let units: Vec<u64> =
            serde_json::from_str(&text).with_context(|| format!("{} is not a JSON array of quantities", path.display()))?;
        return Ok(PurchasePlan(units));
    }
    let path = a.archive.as_ref().expect("clap requires --plan or --archive");
    let file = ArchiveFile::load(path)?;
    match file.entries.entries().get(a.entry) {
        Some(e) => Ok(e.plan.clone()),
        None => bail!("{} has {} entries; no entry {}", path.display(), file.entries.len(), a.entry),
    }
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let instance = ProcurementInstance::load(&a.input)?;
    let plan = load_plan(&a)?;
    let counts: Vec<u64> = instance.diseases.iter().map(|d| d.expected_cases).collect();
    let run = simulate(&instance, &plan, &counts, a.trace.is_some())?;
    if let Some(path) = &a.trace {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_tsv(&instance, &run.trace, io::BufWriter::new(file))?;
        eprintln!("wrote {} trace lines to {}", run.trace.len(), path.display());
    }
    let report = check_feasibility(&instance, &plan)?;
    let r = &run.result;
    print_json(&json!({
        "epidemic_effect": r.epidemic_effect,
        "treatment_effect": r.treatment_effect,
        "per_disease_effects": r.per_disease_effects,
        "cost_cents": r.cost_spent.get(),
        "budget_cents": instance.budget.get(),
        "feasible": report.is_feasible(),
        "budget_excess_cents": report.budget_excess.get(),
        "untreated_lower_cases": report.untreated_lower_cases,
        "untreated_suspected": report.untreated_suspected,
    }))
}

fn load_points(path: &Path) -> Result<Vec<Point>> {
    let file = ArchiveFile::load(path)?;
    if file.entries.is_empty() {
        bail!("{} has an empty archive", path.display());
    }
    Ok(file.entries.points())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let (pa, pb) = (load_points(&a.a)?, load_points(&a.b)?);
    print_json(&json!({
        "hyperarea_a": hyperarea(&pa, a.reference)?,
        "hyperarea_b": hyperarea(&pb, a.reference)?,
        "cov_ab": coverage(&pa, &pb)?,
        "cov_ba": coverage(&pb, &pa)?,
    }))
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let instance = ProcurementInstance::load(&a.input)?;
    if a.profile >= instance.profile_count() {
        bail!("profile {} out of range (0..{})", a.profile, instance.profile_count());
    }
    let spec = SubproblemSpec::from_division(&instance, &divide(&instance), a.profile, Cents(a.budget));
    eprintln!("profile {}: dimension {}, {} cases", a.profile, spec.dimension(), spec.cases);
    let cmp = compare_with_oracle(&spec, &TabuConfig::with_seed(a.seed), a.runs)?;
    print_json(&json!({
        "optimum": cmp.optimum,
        "enumerated": cmp.evaluated,
        "success_rate": cmp.success_rate(),
        "median_iterations": cmp.median_iterations(),
        "runs": cmp.runs,
    }))
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let instance = ProcurementInstance::load(&a.input)?;
    let problem = TransformedProblem::new(&instance);
    let complexity = complexity_report(&instance, &x_bounds(&instance), &problem.budget_bounds);
    let points = a.archive.as_deref().map(load_points).transpose()?;
    let other = a.other.as_deref().map(load_points).transpose()?;
    let hyperarea = points.as_ref().map(|p| hyperarea(p, a.reference)).transpose()?;
    let (coverage_ab, coverage_ba) = match (&points, &other) {
        (Some(pa), Some(pb)) => (Some(coverage(pa, pb)?), Some(coverage(pb, pa)?)),
        _ => (None, None),
    };
    print_json(&json!({
        "hyperarea": hyperarea,
        "coverage_ab": coverage_ab,
        "coverage_ba": coverage_ba,
        "complexity": complexity,
    }))
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let instance = ProcurementInstance::load(&a.input)?;
    let dir = match &a.out_dir {
        Some(d) => d.clone(),
        None => std::env::temp_dir().join(format!("procure-bench-{}", std::process::id())),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = String::from("algorithm,space,seed,evaluations,generations,entries,hyperarea\n");
    for algorithm in [Algorithm::Nsga2, Algorithm::Moead] {
        for space in [Space::Original, Space::Transformed] {
            for seed in 0..a.seeds {
                let config = run_config(algorithm, space, &a.limits, seed, a.pop, a.threads);
                config.validate()?;
                let path = dir.join(format!("{algorithm}-{space}-{seed}.json"));
                let (file, area) = solve_to(&instance, &a.input, &config, &path)?;
                csv.push_str(&format!(
                    "{algorithm},{space},{seed},{},{},{},{area}\n",
                    file.evaluations,
                    file.generations,
                    file.entries.len()
                ));
            }
        }
    }
    if a.out_dir.is_none() {
        fs::remove_dir_all(&dir).ok();
    }
    match &a.output {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().write_all(csv.as_bytes())?),
    }
}
