//! Acceptance criteria, one PASS/FAIL line each.
//!
//! `PROCURE_ACCEPTANCE=1,2,6` runs only the listed criteria; the others
//! print SKIP.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use procure::bounds::{x_bounds, y_bounds};
use procure::instance::tiny;
use procure::instancegen::{generate, random_subproblem, GenSpec, SubproblemGenSpec};
use procure::metrics::{complexity_report, coverage, hyperarea, Point};
use procure::moea::{run, Algorithm, ArchiveFile, RunConfig, Space};
use procure::simulation::{check_feasibility, divide, evaluate_original};
use procure::subproblem::{compare_with_oracle, evaluate_allocation, TabuConfig};
use procure::{BudgetAllocation, ProcurementInstance, PurchasePlan};

type Outcome = Result<String, String>;

const REFERENCE: Point = (0.0, 0.0);

// Criterion 1.
const ORACLE_SPECS: u64 = 20;
const ORACLE_RUNS: usize = 50;
const MIN_SUCCESS_RATE: f64 = 0.95;
const MAX_MEDIAN_ITERATIONS: usize = 100;
const ORACLE_SECONDS: f64 = 120.0;

// Criterion 3.
const INSTANCE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const RUN_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];
const RUN_SECONDS: f64 = 60.0;
const MIN_HYPERAREA_RATIO: f64 = 2.0;
const MIN_COVERAGE: f64 = 0.9;
/// Populations chosen on generator seeds 101 to 103, which are disjoint
/// from the instances above.
const ORIGINAL_POPULATION: usize = 100;
const TRANSFORMED_POPULATION: usize = 20;

// Criterion 7.
const EFFECT_TRIALS: usize = 10_000;
const SIMULATED_INSTANCES: u64 = 100;
const REPAIR_TRIALS: usize = 10_000;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut worst_rate: f64 = 1.0;
    let mut worst_median = 0;
    let mut failures = Vec::new();
    for seed in 0..ORACLE_SPECS {
        let spec = random_subproblem(&SubproblemGenSpec { seed, ..SubproblemGenSpec::default() })
            .map_err(|e| format!("spec {seed}: {e}"))?;
        let config = TabuConfig { seed, ..TabuConfig::default() };
        let cmp = compare_with_oracle(&spec, &config, ORACLE_RUNS).map_err(|e| format!("spec {seed}: {e}"))?;
        let rate = cmp.success_rate();
        let median = cmp.median_iterations().unwrap_or(usize::MAX);
        worst_rate = worst_rate.min(rate);
        worst_median = worst_median.max(median);
        if rate < MIN_SUCCESS_RATE || median > MAX_MEDIAN_ITERATIONS {
            failures.push(format!("spec {seed} (D={}) rate {rate:.2} median {median}", spec.dimension()));
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let summary = format!(
        "{ORACLE_SPECS} specs x {ORACLE_RUNS} runs, worst success {worst_rate:.2}, worst median {worst_median} iterations"
    );
    if !failures.is_empty() {
        return Err(format!("{summary}; {}", failures.join("; ")));
    }
    if seconds >= ORACLE_SECONDS {
        return Err(format!("{summary}; over the {ORACLE_SECONDS}s limit"));
    }
    Ok(summary)
}

fn cross_formulation() -> Outcome {
    let t = tiny();
    let division = divide(&t);
    let bounds = y_bounds(&t, &division);
    let config = TabuConfig::default();
    let at = |y: &[procure::Cents]| {
        let e = evaluate_allocation(&t, &division, &bounds, &BudgetAllocation(y.to_vec()), &config)
            .map_err(|e| e.to_string())?;
        Ok::<_, String>((e.epidemic_effect, e.treatment_effect))
    };
    let high = at(&bounds.y_upper)?;
    let low = at(&bounds.y_lower)?;
    let best = PurchasePlan(vec![1, 1, 0, 4, 4, 0]);
    let direct = evaluate_original(&t, &best).map_err(|e| e.to_string())?;
    let direct = (direct.epidemic_effect, direct.treatment_effect);
    if high != (1.0, 4.0) || low != (0.5, 2.4) || direct != high {
        return Err(format!("upper {high:?}, lower {low:?}, all-best plan {direct:?}"));
    }
    Ok(format!("upper {high:?} = all-best plan, lower {low:?}"))
}

fn comparison_config(space: Space, seed: u64) -> RunConfig {
    let population = match space {
        Space::Original => ORIGINAL_POPULATION,
        Space::Transformed => TRANSFORMED_POPULATION,
    };
    RunConfig {
        algorithm: Algorithm::Nsga2,
        space,
        population,
        time_limit: Some(RUN_SECONDS),
        max_evaluations: None,
        seed,
        ..RunConfig::default()
    }
}

fn generated(seed: u64) -> Result<ProcurementInstance, String> {
    generate(&GenSpec { seed, ..GenSpec::default() }).map_err(|e| format!("instance {seed}: {e}"))
}

/// Transformed archives collected along the way, checked by criterion 4.
type Archives = Vec<(ProcurementInstance, ArchiveFile)>;

fn transform_advantage(archives: &mut Archives) -> Outcome {
    let mut lines = Vec::new();
    let mut failed = false;
    let (mut covered, mut compared) = (0usize, 0usize);
    for &instance_seed in &INSTANCE_SEEDS {
        let instance = generated(instance_seed)?;
        let mut areas = [Vec::new(), Vec::new()];
        for &seed in &RUN_SEEDS {
            let mut fronts = Vec::new();
            for (k, space) in [Space::Original, Space::Transformed].into_iter().enumerate() {
                let config = comparison_config(space, seed);
                let outcome = run(&instance, &config).map_err(|e| format!("instance {instance_seed}: {e}"))?;
                let front = outcome.archive.points();
                let area = hyperarea(&front, REFERENCE).map_err(|e| e.to_string())?;
                println!(
                    "    instance {instance_seed} seed {seed} {space}: {} evaluations, {} points, hyperarea {area:.1}",
                    outcome.evaluations,
                    front.len()
                );
                areas[k].push(area);
                fronts.push(front);
                if space == Space::Transformed {
                    archives.push((instance.clone(), outcome.to_file(&config)));
                }
            }
            if !fronts[0].is_empty() {
                let cov = coverage(&fronts[0], &fronts[1]).map_err(|e| e.to_string())?;
                covered += (cov * fronts[0].len() as f64).round() as usize;
                compared += fronts[0].len();
            }
        }
        let original = median(&mut areas[0]);
        let transformed = median(&mut areas[1]);
        let ratio = transformed / original;
        failed |= ratio.is_nan() || ratio < MIN_HYPERAREA_RATIO;
        lines.push(format!("instance {instance_seed} {transformed:.0}/{original:.0} = {ratio:.2}"));
    }
    let pooled = if compared == 0 { 1.0 } else { covered as f64 / compared as f64 };
    failed |= pooled < MIN_COVERAGE;
    let summary = format!(
        "median hyperarea ratio (need >= {MIN_HYPERAREA_RATIO}): {}; coverage of original points {covered}/{compared} = {pooled:.3} (need >= {MIN_COVERAGE})",
        lines.join(", ")
    );
    if failed {
        Err(summary)
    } else {
        Ok(summary)
    }
}

fn short_transformed_runs(archives: &mut Archives) -> Result<(), String> {
    let mut instances = vec![tiny()];
    for seed in [11, 12] {
        instances.push(
            generate(&GenSpec { diseases: 5, supplies: 80, cases: 400, seed, ..GenSpec::default() })
                .map_err(|e| e.to_string())?,
        );
    }
    for instance in instances {
        for algorithm in [Algorithm::Nsga2, Algorithm::Moead] {
            let config = RunConfig {
                algorithm,
                population: 10,
                max_evaluations: Some(200),
                seed: 3,
                ..RunConfig::default()
            };
            let outcome = run(&instance, &config).map_err(|e| e.to_string())?;
            archives.push((instance.clone(), outcome.to_file(&config)));
        }
    }
    Ok(())
}

fn feasibility_suite(archives: &Archives) -> Outcome {
    let mut entries = 0;
    for (a, (instance, file)) in archives.iter().enumerate() {
        for (e, entry) in file.entries.entries().iter().enumerate() {
            let cost = entry.plan.0.iter().zip(&instance.supplies).map(|(&q, s)| s.unit_price.get() as i128 * q as i128).sum::<i128>();
            if cost > instance.budget.get() as i128 {
                return Err(format!("archive {a} entry {e}: cost {cost} over budget {}", instance.budget));
            }
            let report = check_feasibility(instance, &entry.plan).map_err(|e| e.to_string())?;
            if !report.is_feasible() {
                return Err(format!("archive {a} entry {e}: {report:?}"));
            }
            entries += 1;
        }
    }
    if entries == 0 {
        return Err("no archive entries to check".into());
    }
    Ok(format!("{entries} entries in {} archives within budget and treating every required case", archives.len()))
}

fn determinism() -> Outcome {
    let instance = generate(&GenSpec { diseases: 6, supplies: 90, cases: 500, seed: 21, ..GenSpec::default() })
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for algorithm in [Algorithm::Nsga2, Algorithm::Moead] {
        for space in [Space::Original, Space::Transformed] {
            let mut texts = BTreeSet::new();
            for threads in [1, 4, 1, 4] {
                let config = RunConfig {
                    algorithm,
                    space,
                    population: 12,
                    max_evaluations: Some(240),
                    seed: 9,
                    threads,
                    ..RunConfig::default()
                };
                let outcome = run(&instance, &config).map_err(|e| e.to_string())?;
                texts.insert(outcome.to_file(&config).to_json_string());
            }
            if texts.len() != 1 {
                return Err(format!("{algorithm} {space}: {} distinct archives", texts.len()));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} configurations, 4 solves each at 1 and 4 threads, byte-identical"))
}

fn metric_units() -> Outcome {
    let area = hyperarea(&[(2.0, 4.0), (4.0, 2.0)], REFERENCE).map_err(|e| e.to_string())?;
    if area != 12.0 {
        return Err(format!("hyperarea {area}"));
    }
    let front = [(1.0, 3.0), (3.0, 1.0)];
    let cov = |a: &[Point], b: &[Point]| coverage(a, b).map_err(|e| e.to_string());
    if cov(&front, &front)? != 0.0 || cov(&[(1.0, 1.0)], &[(2.0, 2.0)])? != 1.0 || coverage(&[], &front).is_ok() {
        return Err("coverage trivial cases".into());
    }

    let t = tiny();
    let xb = x_bounds(&t);
    let yb = y_bounds(&t, &divide(&t));
    let report = complexity_report(&t, &xb, &yb);
    let product = |widths: Vec<u128>| widths.into_iter().map(|w| w.max(1)).product::<u128>() as f64;
    let original = product(xb.x_lower.iter().zip(&xb.x_upper).map(|(&l, &u)| (u - l) as u128).collect());
    let transformed = product(yb.y_lower.iter().zip(&yb.y_upper).map(|(l, u)| (u.get() - l.get()) as u128).collect());
    let mut work = 0u128;
    let mut divided = 0u128;
    for p in t.profiles() {
        let cases = t.expected_cases(p.index) as u128;
        let alternatives: u128 = p.items.iter().map(|i| i.alternatives.len() as u128).sum();
        let counted: Vec<u128> =
            p.alternative_items().iter().map(|&j| p.items[j].alternatives.len() as u128).collect();
        let size = counted.iter().map(|&a| cases.max(1).pow(a as u32)).product::<u128>();
        work += cases * alternatives;
        if cases > 0 {
            divided += size * cases * alternatives;
        }
    }
    let expected = (original * work as f64).log10() / (transformed * divided as f64).log10();
    if (report.exact_ratio - expected).abs() > 1e-12 {
        return Err(format!("exact ratio {} against direct {expected}", report.exact_ratio));
    }
    Ok(format!("hyperarea 12, coverage 0/1/error cases, exact ratio {expected:.6} on the small instance"))
}

fn property_suites() -> Outcome {
    let parts = [
        common::effect_bounds_and_monotonicity(EFFECT_TRIALS)?,
        common::simulation_conservation(SIMULATED_INSTANCES)?,
        common::repair_properties(REPAIR_TRIALS)?,
    ];
    Ok(format!("effects {}, simulation {}, repair {}", parts[0], parts[1], parts[2]))
}

fn main() -> ExitCode {
    let selected: Option<BTreeSet<usize>> = std::env::var("PROCURE_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|p| p.trim().parse().ok()).collect());
    let wanted = |n: usize| selected.as_ref().is_none_or(|s| s.contains(&n));
    let mut archives = Archives::new();
    let mut failed = false;
    let mut report = |n: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if !wanted(n) {
            println!("[SKIP] {n} {name}");
            return;
        }
        let started = Instant::now();
        let outcome = run();
        let seconds = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {n} {name}: {detail} ({seconds:.1}s)"),
            Err(detail) => {
                failed = true;
                println!("[FAIL] {n} {name}: {detail} ({seconds:.1}s)");
            }
        }
    };
    report(1, "subproblem oracle equivalence", &mut oracle_equivalence);
    report(2, "cross-formulation consistency", &mut cross_formulation);
    report(3, "transform-and-divide advantage", &mut || transform_advantage(&mut archives));
    report(4, "transformed archive feasibility", &mut || {
        short_transformed_runs(&mut archives)?;
        feasibility_suite(&archives)
    });
    report(5, "determinism", &mut determinism);
    report(6, "metric units", &mut metric_units);
    report(7, "property suites", &mut property_suites);
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
