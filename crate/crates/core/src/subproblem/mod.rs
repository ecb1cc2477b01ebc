//! Per-profile budget-constrained effect maximization.
//!
//! A solution counts, for every alternative item, how many of the
//! profile's cases use each alternative. Cases are matched to alternatives
//! rank by rank: the first cases get the most effective alternative of
//! every item, so a solution's per-case effects follow from prefix sums.

mod allocation;
mod greedy;
mod layout;
mod oracle;
mod tabu;

use crate::error::{Error, Result};
use crate::instance::{CompiledEffect, ProcurementInstance, SupplyId};
use crate::money::Cents;
use crate::simulation::DivisionOutcome;

pub use allocation::{evaluate_allocation, TransformedEvaluation, TransformedProblem};
pub use greedy::greedy_improve;
pub use oracle::{
    compare_with_oracle, oracle_size, oracle_solve, OracleComparison, OracleOutcome, OracleRun, ORACLE_LIMIT,
};
pub use tabu::{solve_subproblem, tabu_search, TabuConfig, TabuOutcome};

pub(crate) use layout::Layout;

/// Alternative-usage counts, `counts[slot][alternative]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SubproblemSolution {
    counts: Vec<Vec<u64>>,
}

impl SubproblemSolution {
    pub fn new(counts: Vec<Vec<u64>>) -> Self {
        SubproblemSolution { counts }
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<Vec<u64>> {
        self.counts
    }

    pub fn get(&self, slot: usize, alternative: usize) -> u64 {
        self.counts[slot][alternative]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecAlternative {
    pub supply: SupplyId,
    pub quantity: u32,
    /// Price of one case's worth, `c * q`.
    pub case_cost: Cents,
    pub effect: f64,
    /// Cases this alternative can serve from storage at no cost.
    pub storage: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecItem {
    /// Effect-nonincreasing order.
    pub alternatives: Vec<SpecAlternative>,
}

/// One subproblem: `cases` cases, a budget, and the alternative items of a
/// profile with storage already netted out.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemSpec {
    pub profile: usize,
    pub cases: u64,
    pub budget: Cents,
    pub items: Vec<SpecItem>,
    pub effect_fn: CompiledEffect,
}

impl SubproblemSpec {
    pub fn new(profile: usize, cases: u64, budget: Cents, items: Vec<SpecItem>, effect_fn: CompiledEffect) -> Result<Self> {
        if effect_fn.slots() != items.len() {
            return Err(Error::Structural(format!(
                "effect function has {} slots for {} items",
                effect_fn.slots(),
                items.len()
            )));
        }
        for (j, item) in items.iter().enumerate() {
            if item.alternatives.is_empty() {
                return Err(Error::Structural(format!("item {j} has no alternatives")));
            }
            if item.alternatives.windows(2).any(|w| w[0].effect < w[1].effect) {
                return Err(Error::Structural(format!("item {j} is not sorted by effect")));
            }
            let stored: u64 = item.alternatives.iter().map(|a| a.storage).sum();
            if stored > cases {
                return Err(Error::Structural(format!("item {j} stores {stored} cases of {cases}")));
            }
        }
        Ok(SubproblemSpec {
            profile,
            cases,
            budget,
            items,
            effect_fn,
        })
    }

    /// The subproblem of `profile` under the division's storage split.
    pub fn from_division(
        instance: &ProcurementInstance,
        division: &DivisionOutcome,
        profile: usize,
        budget: Cents,
    ) -> Self {
        let p = instance.profile(profile);
        let items = p
            .items
            .iter()
            .filter(|i| !i.mandatory)
            .enumerate()
            .map(|(slot, item)| SpecItem {
                alternatives: item
                    .alternatives
                    .iter()
                    .enumerate()
                    .map(|(k, a)| SpecAlternative {
                        supply: a.supply,
                        quantity: a.quantity,
                        case_cost: instance.price(a.supply).times(a.quantity as u64),
                        effect: a.effect,
                        storage: division.storage_allotments[profile][slot][k],
                    })
                    .collect(),
            })
            .collect();
        SubproblemSpec {
            profile,
            cases: instance.expected_cases(profile),
            budget,
            items,
            effect_fn: p.compiled_effect(),
        }
    }

    /// Raw dimension `D`, the number of alternative components.
    pub fn dimension(&self) -> usize {
        self.items.iter().map(|i| i.alternatives.len()).sum()
    }

    /// Dimension left after the per-item sum constraints, `D - J`.
    pub fn free_dimension(&self) -> usize {
        self.dimension() - self.items.len()
    }

    pub fn check(&self, z: &SubproblemSolution) -> Result<()> {
        if z.counts.len() != self.items.len() {
            return Err(Error::Structural(format!(
                "solution has {} items, subproblem has {}",
                z.counts.len(),
                self.items.len()
            )));
        }
        for (j, (row, item)) in z.counts.iter().zip(&self.items).enumerate() {
            if row.len() != item.alternatives.len() {
                return Err(Error::Structural(format!(
                    "item {j}: {} counts for {} alternatives",
                    row.len(),
                    item.alternatives.len()
                )));
            }
            let total: u64 = row.iter().sum();
            if total != self.cases {
                return Err(Error::Structural(format!("item {j}: counts sum to {total}, expected {}", self.cases)));
            }
        }
        Ok(())
    }

    pub fn cost(&self, z: &SubproblemSolution) -> Result<Cents> {
        self.check(z)?;
        Ok(self.cost_unchecked(z))
    }

    pub(crate) fn cost_unchecked(&self, z: &SubproblemSolution) -> Cents {
        self.items
            .iter()
            .zip(&z.counts)
            .flat_map(|(item, row)| item.alternatives.iter().zip(row))
            .map(|(a, &n)| a.case_cost.times(n.saturating_sub(a.storage)))
            .sum()
    }

    /// Cost change of adding `delta` (±1) cases to one component at
    /// count `current`.
    pub(crate) fn component_cost_delta(&self, j: usize, k: usize, current: u64, delta: i64) -> Cents {
        let a = &self.items[j].alternatives[k];
        let next = (current as i64 + delta) as u64;
        a.case_cost.times(next.saturating_sub(a.storage)) - a.case_cost.times(current.saturating_sub(a.storage))
    }

    pub fn effect(&self, z: &SubproblemSolution) -> Result<f64> {
        self.check(z)?;
        Ok(Layout::new(z.clone()).effect(self))
    }

    /// Every case on the most effective alternative of every item.
    pub fn all_best(&self) -> SubproblemSolution {
        SubproblemSolution::new(
            self.items
                .iter()
                .map(|i| {
                    let mut row = vec![0; i.alternatives.len()];
                    row[0] = self.cases;
                    row
                })
                .collect(),
        )
    }

    /// Storage as allotted, every other case on the cheapest alternative.
    pub fn cheapest(&self) -> SubproblemSolution {
        SubproblemSolution::new(
            self.items
                .iter()
                .map(|item| {
                    let mut row: Vec<u64> = item.alternatives.iter().map(|a| a.storage).collect();
                    let k = item
                        .alternatives
                        .iter()
                        .enumerate()
                        .min_by_key(|(_, a)| (a.case_cost, a.supply))
                        .map(|(k, _)| k)
                        .expect("nonempty");
                    row[k] += self.cases - row.iter().sum::<u64>();
                    row
                })
                .collect(),
        )
    }
}

/// Guards every solution handed out of this module.
pub(crate) fn debug_check(spec: &SubproblemSpec, z: &SubproblemSolution) {
    debug_assert!(spec.check(z).is_ok(), "malformed solution {z:?}");
    debug_assert!(spec.cost_unchecked(z) <= spec.budget, "solution over budget");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny;
    use crate::simulation::divide;

    pub(crate) fn tiny_spec(profile: usize, budget: i64) -> SubproblemSpec {
        let t = tiny();
        SubproblemSpec::from_division(&t, &divide(&t), profile, Cents(budget))
    }

    fn z(rows: &[&[u64]]) -> SubproblemSolution {
        SubproblemSolution::new(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn tiny_costs() {
        assert_eq!(tiny_spec(1, 9).cost(&z(&[&[1, 3]])).unwrap(), Cents(8));
        assert_eq!(tiny_spec(0, 2).cost(&z(&[&[0, 1]])).unwrap(), Cents(2));
    }

    #[test]
    fn storage_covered_cost_is_zero() {
        let mut spec = tiny_spec(1, 0);
        spec.items[0].alternatives[0].storage = 1;
        spec.items[0].alternatives[1].storage = 3;
        assert_eq!(spec.cost(&z(&[&[1, 3]])).unwrap(), Cents::ZERO);
    }

    #[test]
    fn tiny_effect() {
        let e = tiny_spec(1, 9).effect(&z(&[&[1, 3]])).unwrap();
        assert!((e - 2.8).abs() < 1e-12, "{e}");
    }

    #[test]
    fn all_best_effect_is_uniform() {
        let spec = tiny_spec(1, 20);
        assert_eq!(spec.effect(&spec.all_best()).unwrap(), 4.0);
    }

    #[test]
    fn malformed_solution_is_structural_error() {
        let spec = tiny_spec(1, 9);
        assert!(matches!(spec.cost(&z(&[&[1, 2]])), Err(Error::Structural(_))));
        assert!(matches!(spec.cost(&z(&[&[1, 3, 0]])), Err(Error::Structural(_))));
    }

    #[test]
    fn cheapest_matches_division() {
        let t = tiny();
        let d = divide(&t);
        for p in 0..2 {
            let spec = SubproblemSpec::from_division(&t, &d, p, Cents(100));
            assert_eq!(spec.cheapest(), d.cheapest_solutions[p]);
        }
    }
}
