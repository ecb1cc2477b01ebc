//! Evaluating a budget allocation by solving every profile's subproblem.

use super::{solve_subproblem, SubproblemSolution, SubproblemSpec, TabuConfig};
use crate::bounds::{x_bounds, y_bounds, BudgetBounds, VariableBounds};
use crate::error::{Error, Result};
use crate::instance::ProcurementInstance;
use crate::money::Cents;
use crate::plan::{BudgetAllocation, PurchasePlan};
use crate::rng::derive_seed;
use crate::simulation::{divide, DivisionOutcome};

#[derive(Clone, Debug, PartialEq)]
pub struct TransformedEvaluation {
    /// The allocation after clamping into the budget bounds.
    pub allocation: BudgetAllocation,
    pub epidemic_effect: f64,
    pub treatment_effect: f64,
    /// Subproblem effect per profile, epidemic first.
    pub profile_effects: Vec<f64>,
    pub solutions: Vec<SubproblemSolution>,
    /// Subproblem spend per profile.
    pub costs: Vec<Cents>,
}

/// The transformed problem of one instance: division, bounds, and one
/// subproblem template per profile, computed once.
#[derive(Clone, Debug)]
pub struct TransformedProblem<'a> {
    pub instance: &'a ProcurementInstance,
    pub division: DivisionOutcome,
    pub x_bounds: VariableBounds,
    pub budget_bounds: BudgetBounds,
    specs: Vec<SubproblemSpec>,
}

impl<'a> TransformedProblem<'a> {
    pub fn new(instance: &'a ProcurementInstance) -> Self {
        let division = divide(instance);
        let budget_bounds = y_bounds(instance, &division);
        let specs = (0..instance.profile_count())
            .map(|p| SubproblemSpec::from_division(instance, &division, p, Cents::ZERO))
            .collect();
        TransformedProblem {
            instance,
            x_bounds: x_bounds(instance),
            division,
            budget_bounds,
            specs,
        }
    }

    /// The subproblem of `profile` with the given budget.
    pub fn spec(&self, profile: usize, budget: Cents) -> SubproblemSpec {
        SubproblemSpec {
            budget,
            ..self.specs[profile].clone()
        }
    }

    pub fn evaluate(&self, y: &BudgetAllocation, config: &TabuConfig) -> Result<TransformedEvaluation> {
        solve_all(self.instance, &self.budget_bounds, y, config, |p, budget| self.spec(p, budget))
    }

    /// Purchase plan implied by per-profile solutions: the mandatory lower
    /// bounds plus every case not served from storage.
    pub fn decode(&self, solutions: &[SubproblemSolution]) -> PurchasePlan {
        let mut plan = PurchasePlan(self.x_bounds.x_lower.clone());
        for (spec, z) in self.specs.iter().zip(solutions) {
            for (item, row) in spec.items.iter().zip(z.counts()) {
                for (alt, &n) in item.alternatives.iter().zip(row) {
                    plan[alt.supply] += alt.quantity as u64 * n.saturating_sub(alt.storage);
                }
            }
        }
        plan
    }
}

/// Solves every profile's subproblem under allocation `y` (clamped into
/// the bounds) and sums the effects.
pub fn evaluate_allocation(
    instance: &ProcurementInstance,
    division: &DivisionOutcome,
    bounds: &BudgetBounds,
    y: &BudgetAllocation,
    config: &TabuConfig,
) -> Result<TransformedEvaluation> {
    solve_all(instance, bounds, y, config, |p, budget| {
        SubproblemSpec::from_division(instance, division, p, budget)
    })
}

fn solve_all(
    instance: &ProcurementInstance,
    bounds: &BudgetBounds,
    y: &BudgetAllocation,
    config: &TabuConfig,
    spec_for: impl Fn(usize, Cents) -> SubproblemSpec,
) -> Result<TransformedEvaluation> {
    if y.len() != bounds.len() {
        return Err(Error::Structural(format!(
            "allocation has {} entries for {} profiles",
            y.len(),
            bounds.len()
        )));
    }
    let allocation = BudgetAllocation(
        y.0.iter()
            .zip(bounds.y_lower.iter().zip(&bounds.y_upper))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
            .collect(),
    );
    let mut profile_effects = Vec::with_capacity(y.len());
    let mut solutions = Vec::with_capacity(y.len());
    let mut costs = Vec::with_capacity(y.len());
    for (p, &budget) in allocation.0.iter().enumerate() {
        let spec = spec_for(p, budget);
        let profile_config = TabuConfig {
            seed: derive_seed(config.seed, p as u64),
            ..config.clone()
        };
        let outcome = solve_subproblem(&spec, &profile_config)?;
        profile_effects.push(outcome.effect);
        solutions.push(outcome.solution);
        costs.push(outcome.cost);
    }
    let treatment_effect = instance
        .diseases
        .iter()
        .zip(&profile_effects[1..])
        .fold(0.0, |acc, (d, &e)| acc + d.weight * e);
    Ok(TransformedEvaluation {
        allocation,
        epidemic_effect: profile_effects[0],
        treatment_effect,
        profile_effects,
        solutions,
        costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny;
    use crate::simulation::evaluate_original;

    fn eval(y: &[i64]) -> (f64, f64) {
        let t = tiny();
        let problem = TransformedProblem::new(&t);
        let out = problem.evaluate(&BudgetAllocation::from_cents(y), &TabuConfig::with_seed(5)).unwrap();
        (out.epidemic_effect, out.treatment_effect)
    }

    #[test]
    fn upper_bounds_give_all_best() {
        assert_eq!(eval(&[10, 20]), (1.0, 4.0));
    }

    #[test]
    fn lower_bounds_give_cheapest() {
        assert_eq!(eval(&[2, 4]), (0.5, 2.4));
    }

    #[test]
    fn partial_disease_budget() {
        let (e, t) = eval(&[2, 9]);
        assert_eq!(e, 0.5);
        assert!((t - 2.8).abs() < 1e-12, "{t}");
    }

    #[test]
    fn out_of_range_allocation_is_clamped() {
        assert_eq!(eval(&[-5, 1000]), (0.5, 4.0));
    }

    #[test]
    fn decoded_plan_matches_original_evaluation() {
        let t = tiny();
        let problem = TransformedProblem::new(&t);
        let out = problem.evaluate(&BudgetAllocation::from_cents(&[10, 20]), &TabuConfig::default()).unwrap();
        let plan = problem.decode(&out.solutions);
        assert_eq!(plan.0, vec![1, 1, 0, 4, 4, 0]);
        let original = evaluate_original(&t, &plan).unwrap();
        assert_eq!((original.epidemic_effect, original.treatment_effect), (1.0, 4.0));
        assert!(plan.cost(&t) <= t.budget);
    }

    #[test]
    fn free_function_agrees_with_problem() {
        let t = tiny();
        let problem = TransformedProblem::new(&t);
        let y = BudgetAllocation::from_cents(&[6, 13]);
        let a = problem.evaluate(&y, &TabuConfig::with_seed(2)).unwrap();
        let b = evaluate_allocation(&t, &problem.division, &problem.budget_bounds, &y, &TabuConfig::with_seed(2))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_length_is_structural() {
        let t = tiny();
        let problem = TransformedProblem::new(&t);
        let err = problem.evaluate(&BudgetAllocation::from_cents(&[1]), &TabuConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }
}
