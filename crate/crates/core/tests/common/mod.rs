//! Seeded property checks shared by the property tests and the acceptance
//! harness. Each returns a description of the first failure.

#![allow(dead_code)]

use procure::bounds::x_bounds;
use procure::instance::{EffectFunction, WeightedItem};
use procure::instancegen::{generate, GenSpec};
use procure::moea::repair_allocation;
use procure::simulation::{check_feasibility, simulate};
use procure::{BudgetAllocation, Cents, PurchasePlan};
use procure::bounds::BudgetBounds;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

fn random_effect_fn(rng: &mut ChaCha8Rng, items: usize) -> EffectFunction {
    let mut groups = Vec::new();
    let mut next = 0;
    while next < items {
        let size = rng.random_range(1..=(items - next).min(3));
        let raw: Vec<f64> = (0..size).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        groups.push(
            raw.iter()
                .enumerate()
                .map(|(k, w)| WeightedItem { item: next + k, weight: w / total })
                .collect(),
        );
        next += size;
    }
    EffectFunction::new(groups)
}

/// Effects stay in `[0, 1]` and never drop when one input rises.
pub fn effect_bounds_and_monotonicity(trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xEFFEC7);
    for trial in 0..trials {
        let items = rng.random_range(1..=8);
        let f = random_effect_fn(&mut rng, items);
        let effects: Vec<f64> = (0..items).map(|_| rng.random::<f64>()).collect();
        let value = f.eval(&effects).map_err(|e| e.to_string())?;
        if !(0.0..=1.0 + 1e-12).contains(&value) {
            return Err(format!("trial {trial}: effect {value} outside [0, 1] for {effects:?}"));
        }
        let mut raised = effects.clone();
        let k = rng.random_range(0..items);
        raised[k] = rng.random_range(raised[k]..=1.0);
        let higher = f.eval(&raised).map_err(|e| e.to_string())?;
        if higher < value - 1e-12 {
            return Err(format!("trial {trial}: raising input {k} lowered {value} to {higher}"));
        }
    }
    Ok(format!("{trials} trials"))
}

fn small_spec(seed: u64) -> GenSpec {
    GenSpec {
        diseases: 5,
        supplies: 80,
        cases: 300,
        seed,
        ..GenSpec::default()
    }
}

/// On generated instances and random plans within the supply bounds, units
/// consumed plus units left equal units available, nothing is consumed
/// beyond stock, and effects are bounded by the case counts.
pub fn simulation_conservation(instances: u64) -> Check {
    let mut checked = 0;
    for seed in 0..instances {
        let instance = generate(&small_spec(seed)).map_err(|e| format!("seed {seed}: {e}"))?;
        let bounds = x_bounds(&instance);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = PurchasePlan(
            bounds.x_lower.iter().zip(&bounds.x_upper).map(|(&lo, &hi)| rng.random_range(lo..=hi)).collect(),
        );
        let counts: Vec<u64> = instance.diseases.iter().map(|d| d.expected_cases).collect();
        let run = simulate(&instance, &plan, &counts, false).map_err(|e| e.to_string())?;
        for (k, supply) in instance.supplies.iter().enumerate() {
            let available = supply.inventory + plan.0[k];
            if run.consumed[k] + run.remaining[k] != available {
                return Err(format!(
                    "seed {seed}: supply {k} consumed {} + left {} != {available}",
                    run.consumed[k], run.remaining[k]
                ));
            }
        }
        let r = &run.result;
        let suspected = instance.epidemic.suspected_cases as f64;
        if r.epidemic_effect < 0.0 || r.epidemic_effect > suspected + 1e-9 {
            return Err(format!("seed {seed}: epidemic effect {} with {suspected} suspected cases", r.epidemic_effect));
        }
        for (i, (d, &e)) in instance.diseases.iter().zip(&r.per_disease_effects).enumerate() {
            if e < 0.0 || e > d.expected_cases as f64 + 1e-9 || r.untreated_diseases[i] > d.expected_cases {
                return Err(format!("seed {seed}: disease {} effect {e} for {} cases", i + 1, d.expected_cases));
            }
        }
        let report = check_feasibility(&instance, &plan).map_err(|e| e.to_string())?;
        if report.budget_excess != (plan.cost(&instance) - instance.budget).positive_part() {
            return Err(format!("seed {seed}: budget excess {} disagrees with cost", report.budget_excess));
        }
        checked += 1;
    }
    Ok(format!("{checked} instances"))
}

fn random_bounds(rng: &mut ChaCha8Rng) -> BudgetBounds {
    let n = rng.random_range(1..=12);
    let y_lower: Vec<Cents> = (0..n).map(|_| Cents(rng.random_range(0..1_000))).collect();
    let y_upper: Vec<Cents> = y_lower.iter().map(|&lo| lo + Cents(rng.random_range(0..5_000))).collect();
    let floor: Cents = y_lower.iter().sum();
    let ceiling: Cents = y_upper.iter().sum();
    let remaining_budget = Cents(rng.random_range(floor.get()..=ceiling.get() + 100));
    BudgetBounds { y_lower, y_upper, remaining_budget }
}

fn random_raw(rng: &mut ChaCha8Rng, bounds: &BudgetBounds) -> Vec<f64> {
    bounds
        .y_lower
        .iter()
        .zip(&bounds.y_upper)
        .map(|(lo, hi)| match rng.random_range(0..10) {
            0 => f64::NAN,
            1 => -1e12,
            2 => 1e12,
            _ => rng.random_range(lo.get() as f64 - 500.0..=hi.get() as f64 + 500.0),
        })
        .collect()
}

/// Repair always lands within the per-profile bounds and the remaining
/// budget, and repairing a repaired allocation changes nothing.
pub fn repair_properties(trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4E9A14);
    for trial in 0..trials {
        let bounds = random_bounds(&mut rng);
        let raw = random_raw(&mut rng, &bounds);
        let y = repair_allocation(&raw, &bounds).map_err(|e| format!("trial {trial}: {e}"))?;
        let within = y.0.iter().zip(bounds.y_lower.iter().zip(&bounds.y_upper)).all(|(v, (lo, hi))| lo <= v && v <= hi);
        if !within || y.total() > bounds.remaining_budget {
            return Err(format!("trial {trial}: {raw:?} repaired to {y:?} outside {bounds:?}"));
        }
        let again_raw: Vec<f64> = y.0.iter().map(|c| c.get() as f64).collect();
        let again: BudgetAllocation = repair_allocation(&again_raw, &bounds).map_err(|e| e.to_string())?;
        if again != y {
            return Err(format!("trial {trial}: repair not idempotent: {y:?} -> {again:?}"));
        }
    }
    Ok(format!("{trials} trials"))
}

/// Generated shape over `seeds` default specs: supply count exact,
/// average items and alternatives within 15% of the targets.
pub fn generator_shape(seeds: u64) -> Check {
    let spec = GenSpec::default();
    let (mut items, mut item_count, mut alternatives) = (0usize, 0usize, 0usize);
    let mut diseases = 0usize;
    for seed in 0..seeds {
        let instance = generate(&GenSpec { seed, ..spec.clone() }).map_err(|e| e.to_string())?;
        if instance.supplies.len() != spec.supplies {
            return Err(format!("seed {seed}: {} supplies", instance.supplies.len()));
        }
        for d in &instance.diseases {
            let alt_items: Vec<_> = d.items.iter().filter(|i| !i.mandatory).collect();
            items += alt_items.len();
            item_count += alt_items.len();
            alternatives += alt_items.iter().map(|i| i.alternatives.len()).sum::<usize>();
        }
        diseases += instance.diseases.len();
    }
    let avg_items = items as f64 / diseases as f64;
    let avg_alts = alternatives as f64 / item_count as f64;
    let near = |v: f64, target: f64| (v - target).abs() <= 0.15 * target;
    if !near(avg_items, spec.avg_items) || !near(avg_alts, spec.avg_alternatives) {
        return Err(format!("items {avg_items:.2} (target {}), alternatives {avg_alts:.2} (target {})", spec.avg_items, spec.avg_alternatives));
    }
    Ok(format!("items {avg_items:.2}, alternatives {avg_alts:.2} over {seeds} seeds"))
}
