//! Storage-only simulation that splits inventory between profiles and
//! prices the cheapest way to treat every expected case.

use super::schedule::{build_schedule, CaseSource};
use crate::instance::{ProcurementInstance, TreatmentItem};
use crate::money::Cents;
use crate::subproblem::SubproblemSolution;

#[derive(Clone, Debug, PartialEq)]
pub struct DivisionOutcome {
    /// `[profile][slot][alternative]`: cases served from initial inventory.
    /// Slots enumerate a profile's alternative items in order.
    pub storage_allotments: Vec<Vec<Vec<u64>>>,
    /// Storage-served plus advance-purchased cases per alternative.
    pub cheapest_solutions: Vec<SubproblemSolution>,
    /// Cost of the advance purchases made for each profile.
    pub advance_cost: Vec<Cents>,
}

/// Index of the alternative with the lowest per-case cost, ties to the
/// lower supply id.
fn cheapest_alternative(instance: &ProcurementInstance, item: &TreatmentItem) -> usize {
    item.alternatives
        .iter()
        .enumerate()
        .min_by_key(|(_, a)| (instance.price(a.supply).times(a.quantity as u64), a.supply))
        .map(|(k, _)| k)
        .expect("items have alternatives")
}

/// Total mandatory demand per supply: `r_0` epidemic cases plus `r_i`
/// cases of every disease.
pub(crate) fn mandatory_demand(instance: &ProcurementInstance) -> Vec<u64> {
    let mut demand = vec![0u64; instance.supplies.len()];
    for profile in instance.profiles() {
        let cases = instance.expected_cases(profile.index);
        for item in profile.items.iter().filter(|i| i.mandatory) {
            let alt = &item.alternatives[0];
            demand[alt.supply.index()] += cases * alt.quantity as u64;
        }
    }
    demand
}

/// Runs the expected-count schedule against storage alone.
///
/// Storage first covers mandatory demand. Each remaining case takes, per
/// alternative item, the most effective alternative still in storage;
/// failing that, the cheapest alternative is bought in advance.
pub fn divide(instance: &ProcurementInstance) -> DivisionOutcome {
    let demand = mandatory_demand(instance);
    let mut storage: Vec<u64> = instance
        .supplies
        .iter()
        .zip(&demand)
        .map(|(s, &d)| s.inventory - s.inventory.min(d))
        .collect();

    let items: Vec<Vec<&TreatmentItem>> = instance
        .profiles()
        .map(|p| p.items.iter().filter(|i| !i.mandatory).collect())
        .collect();
    let cheapest: Vec<Vec<usize>> = items
        .iter()
        .map(|its| its.iter().map(|i| cheapest_alternative(instance, i)).collect())
        .collect();
    let zeros = |p: usize| -> Vec<Vec<u64>> { items[p].iter().map(|i| vec![0; i.alternatives.len()]).collect() };
    let mut allotments: Vec<Vec<Vec<u64>>> = (0..items.len()).map(zeros).collect();
    let mut counts: Vec<Vec<Vec<u64>>> = (0..items.len()).map(zeros).collect();
    let mut cursors: Vec<Vec<usize>> = items.iter().map(|its| vec![0; its.len()]).collect();
    let mut advance_cost = vec![Cents::ZERO; items.len()];

    let mut serve = |p: usize, storage: &mut Vec<u64>| {
        for (slot, item) in items[p].iter().enumerate() {
            let cursor = &mut cursors[p][slot];
            while *cursor < item.alternatives.len() {
                let alt = &item.alternatives[*cursor];
                if storage[alt.supply.index()] >= alt.quantity as u64 {
                    break;
                }
                *cursor += 1;
            }
            if let Some(alt) = item.alternatives.get(*cursor) {
                storage[alt.supply.index()] -= alt.quantity as u64;
                allotments[p][slot][*cursor] += 1;
                counts[p][slot][*cursor] += 1;
            } else {
                let k = cheapest[p][slot];
                let alt = &item.alternatives[k];
                counts[p][slot][k] += 1;
                advance_cost[p] += instance.price(alt.supply).times(alt.quantity as u64);
            }
        }
    };

    let expected: Vec<u64> = instance.diseases.iter().map(|d| d.expected_cases).collect();
    let schedule = build_schedule(instance, &expected, true).expect("counts match diseases");
    for event in &schedule.events {
        if let CaseSource::Disease(id) = event.source {
            serve(id as usize, &mut storage);
        }
        if event.suspected {
            serve(0, &mut storage);
        }
    }

    DivisionOutcome {
        storage_allotments: allotments,
        cheapest_solutions: counts.into_iter().map(SubproblemSolution::new).collect(),
        advance_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{tiny, Alternative, EffectFunction, SupplyId};

    #[test]
    fn tiny_zero_inventory() {
        let d = divide(&tiny());
        assert_eq!(d.cheapest_solutions[0].counts(), &[vec![0, 1]]);
        assert_eq!(d.cheapest_solutions[1].counts(), &[vec![0, 4]]);
        assert_eq!(d.advance_cost, vec![Cents(2), Cents(4)]);
        assert_eq!(d.storage_allotments, vec![vec![vec![0, 0]], vec![vec![0, 0]]]);
    }

    #[test]
    fn tiny_with_best_in_storage() {
        let mut t = tiny();
        t.supplies[4].inventory = 4;
        let d = divide(&t);
        assert_eq!(d.cheapest_solutions[1].counts(), &[vec![4, 0]]);
        assert_eq!(d.storage_allotments[1], vec![vec![4, 0]]);
        assert_eq!(d.advance_cost[1], Cents::ZERO);
    }

    #[test]
    fn mandatory_stock_is_reserved() {
        let mut t = tiny();
        // S4 is D1's mandatory supply; list it as an epidemic alternative too.
        t.epidemic.items[1].alternatives.push(Alternative {
            supply: SupplyId(4),
            quantity: 1,
            effect: 0.9,
        });
        t.supplies[3].inventory = 5;
        t.canonicalize();
        t.validate().unwrap();
        let d = divide(&t);
        // Four units stay for D1's mandatory item, one serves the epidemic case.
        assert_eq!(d.storage_allotments[0], vec![vec![0, 1, 0]]);
    }

    #[test]
    fn first_arrival_takes_shared_storage() {
        let mut t = tiny();
        let mut d2 = t.diseases[0].clone();
        d2.id = 2;
        d2.emergency = true;
        t.diseases.push(d2);
        t.epidemic.effect_fn = EffectFunction::weighted_sum(&[(1, 1.0)]);
        t.supplies[4].inventory = 1;
        t.canonicalize();
        // D1 arrives at 30h, D2 at 90h: D1 gets the single S5.
        let d = divide(&t);
        assert_eq!(d.storage_allotments[1], vec![vec![1, 0]]);
        assert_eq!(d.storage_allotments[2], vec![vec![0, 0]]);
    }
}
