//! Search-space bounds for both formulations.

use crate::error::{Error, Result};
use crate::instance::ProcurementInstance;
use crate::money::Cents;
use crate::simulation::{mandatory_demand, DivisionOutcome};

/// Per-supply purchase ranges of the original problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableBounds {
    pub x_lower: Vec<u64>,
    pub x_upper: Vec<u64>,
}

impl VariableBounds {
    pub fn width(&self, k: usize) -> u64 {
        self.x_upper[k] - self.x_lower[k]
    }

    /// Cost of the mandatory purchases, `sum_k c_k * lower_k`.
    pub fn lower_cost(&self, instance: &ProcurementInstance) -> Cents {
        instance.plan_cost(&self.x_lower)
    }
}

/// Per-profile budget ranges of the transformed problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetBounds {
    pub y_lower: Vec<Cents>,
    pub y_upper: Vec<Cents>,
    /// Budget left after the mandatory purchases.
    pub remaining_budget: Cents,
}

impl BudgetBounds {
    pub fn len(&self) -> usize {
        self.y_lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_lower.is_empty()
    }

    /// How far the cheapest allocation overshoots the remaining budget.
    pub fn deficit(&self) -> Option<Cents> {
        let need: Cents = self.y_lower.iter().sum();
        (need > self.remaining_budget).then(|| need - self.remaining_budget)
    }

    pub fn ensure_feasible(&self) -> Result<()> {
        match self.deficit() {
            Some(deficit) => Err(Error::Infeasible { deficit }),
            None => Ok(()),
        }
    }
}

/// Lower bounds cover mandatory demand net of inventory; upper bounds cover
/// every item the supply appears in, for every case.
pub fn x_bounds(instance: &ProcurementInstance) -> VariableBounds {
    let mandatory = mandatory_demand(instance);
    let mut any_use = vec![0u64; instance.supplies.len()];
    for profile in instance.profiles() {
        let cases = instance.expected_cases(profile.index);
        for alt in profile.items.iter().flat_map(|i| &i.alternatives) {
            any_use[alt.supply.index()] += cases * alt.quantity as u64;
        }
    }
    let (x_lower, x_upper) = instance
        .supplies
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let lower = mandatory[k].saturating_sub(s.inventory);
            let upper = any_use[k].saturating_sub(s.inventory).max(lower);
            (lower, upper)
        })
        .unzip();
    VariableBounds { x_lower, x_upper }
}

/// Lower bounds are the division's advance costs; upper bounds price every
/// case on the most effective alternative, netted against the storage that
/// the division allotted to it.
pub fn y_bounds(instance: &ProcurementInstance, division: &DivisionOutcome) -> BudgetBounds {
    let y_upper = instance
        .profiles()
        .map(|profile| {
            let cases = instance.expected_cases(profile.index);
            profile
                .items
                .iter()
                .filter(|i| !i.mandatory)
                .enumerate()
                .map(|(slot, item)| {
                    let best = &item.alternatives[0];
                    let stored = division.storage_allotments[profile.index][slot][0];
                    instance
                        .price(best.supply)
                        .times(best.quantity as u64 * cases.saturating_sub(stored))
                })
                .sum()
        })
        .collect();
    let remaining_budget = instance.budget - x_bounds(instance).lower_cost(instance);
    BudgetBounds {
        y_lower: division.advance_cost.clone(),
        y_upper,
        remaining_budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny;
    use crate::simulation::divide;

    #[test]
    fn tiny_x_bounds() {
        let b = x_bounds(&tiny());
        assert_eq!(b.x_lower, vec![1, 0, 0, 4, 0, 0]);
        assert_eq!(b.x_upper, vec![1, 1, 1, 4, 4, 4]);
    }

    #[test]
    fn large_inventory_clamps_to_zero() {
        let mut t = tiny();
        t.supplies[5].inventory = 100;
        t.supplies[3].inventory = 100;
        let b = x_bounds(&t);
        assert_eq!((b.x_lower[5], b.x_upper[5]), (0, 0));
        assert_eq!((b.x_lower[3], b.x_upper[3]), (0, 0));
    }

    #[test]
    fn tiny_y_bounds() {
        let t = tiny();
        let b = y_bounds(&t, &divide(&t));
        assert_eq!(b.y_lower, vec![Cents(2), Cents(4)]);
        assert_eq!(b.y_upper, vec![Cents(10), Cents(20)]);
        assert_eq!(b.remaining_budget, t.budget - Cents(5));
        assert_eq!(b.deficit(), None);
    }

    #[test]
    fn stored_best_alternative_zeroes_epidemic_range() {
        let mut t = tiny();
        t.supplies[1].inventory = 1;
        let b = y_bounds(&t, &divide(&t));
        assert_eq!((b.y_lower[0], b.y_upper[0]), (Cents::ZERO, Cents::ZERO));
    }

    #[test]
    fn no_diseases_leaves_epidemic_only() {
        let mut t = tiny();
        t.diseases.clear();
        t.compute_suspected_cases();
        let b = y_bounds(&t, &divide(&t));
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn infeasible_budget_reports_deficit() {
        let mut t = tiny();
        t.budget = Cents(8);
        let b = y_bounds(&t, &divide(&t));
        assert_eq!(b.deficit(), Some(Cents(3)));
        assert!(matches!(b.ensure_feasible(), Err(Error::Infeasible { deficit: Cents(3) })));
    }
}
