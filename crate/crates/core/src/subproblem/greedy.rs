//! Greedy single-case upgrades.

use super::{debug_check, Layout, SubproblemSolution, SubproblemSpec};
use crate::error::{Error, Result};
use crate::money::Cents;

/// Smallest effect gain counted as an improvement.
pub(crate) const GAIN_TOLERANCE: f64 = 1e-12;

struct Upgrade {
    item: usize,
    to: usize,
    from: usize,
    gain: f64,
    extra_cost: Cents,
}

impl Upgrade {
    /// Free upgrades rank above paid ones; free ones by gain, paid ones by
    /// gain per cent.
    fn beats(&self, other: &Upgrade) -> bool {
        let free = self.extra_cost <= Cents::ZERO;
        let other_free = other.extra_cost <= Cents::ZERO;
        match (free, other_free) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.gain > other.gain,
            (false, false) => {
                self.gain / self.extra_cost.get() as f64 > other.gain / other.extra_cost.get() as f64
            }
        }
    }
}

/// Repeatedly moves one case of one item to a strictly more effective
/// alternative while the budget allows, picking the best move each round.
///
/// Errors with a contract violation if `z` is already over budget.
pub fn greedy_improve(spec: &SubproblemSpec, z: &SubproblemSolution) -> Result<SubproblemSolution> {
    let mut cost = spec.cost(z)?;
    if cost > spec.budget {
        return Err(Error::Contract(format!(
            "greedy start costs {cost}, above the budget of {}",
            spec.budget
        )));
    }
    let mut layout = Layout::new(z.clone());
    let mut upgrades = Upgrades::new(spec);
    while let Some(best) = upgrades.best(spec, &mut layout, cost) {
        let touched = layout.affected(best.item, best.from, best.to);
        layout.shift(best.item, best.from, best.to);
        cost += best.extra_cost;
        upgrades.invalidate(&layout, best.item, &touched);
    }
    let out = layout.solution().clone();
    debug_check(spec, &out);
    Ok(out)
}

/// Every strictly improving (item, from, to) move with its last probed
/// gain. A shift only changes the gains of moves in the same item or moves
/// whose boundary cases it touched, so the rest stay cached.
struct Upgrades {
    moves: Vec<(usize, usize, usize)>,
    gains: Vec<Option<f64>>,
}

impl Upgrades {
    fn new(spec: &SubproblemSpec) -> Self {
        let mut moves = Vec::new();
        for (j, item) in spec.items.iter().enumerate() {
            let alts = &item.alternatives;
            for to in 0..alts.len() {
                for from in to + 1..alts.len() {
                    if alts[to].effect > alts[from].effect {
                        moves.push((j, from, to));
                    }
                }
            }
        }
        let gains = vec![None; moves.len()];
        Upgrades { moves, gains }
    }

    fn invalidate(&mut self, layout: &Layout, item: usize, touched: &[u64]) {
        for (&(j, from, to), gain) in self.moves.iter().zip(&mut self.gains) {
            if gain.is_some() && (j == item || layout.touches(j, from, to, touched)) {
                *gain = None;
            }
        }
    }

    fn best(&mut self, spec: &SubproblemSpec, layout: &mut Layout, cost: Cents) -> Option<Upgrade> {
        let mut best: Option<Upgrade> = None;
        for (&(j, from, to), cached) in self.moves.iter().zip(&mut self.gains) {
            if layout.count(j, from) == 0 {
                continue;
            }
            let extra_cost = spec.component_cost_delta(j, from, layout.count(j, from), -1)
                + spec.component_cost_delta(j, to, layout.count(j, to), 1);
            if cost + extra_cost > spec.budget {
                continue;
            }
            let gain = *cached.get_or_insert_with(|| layout.probe(spec, j, from, to));
            if gain <= GAIN_TOLERANCE {
                continue;
            }
            let candidate = Upgrade {
                item: j,
                to,
                from,
                gain,
                extra_cost,
            };
            if best.as_ref().is_none_or(|b| candidate.beats(b)) {
                best = Some(candidate);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tiny;
    use crate::simulation::divide;

    fn spec(profile: usize, budget: i64) -> SubproblemSpec {
        let t = tiny();
        SubproblemSpec::from_division(&t, &divide(&t), profile, Cents(budget))
    }

    #[test]
    fn tiny_budget_nine() {
        let s = spec(1, 9);
        let out = greedy_improve(&s, &s.cheapest()).unwrap();
        assert_eq!(out.counts(), &[vec![1, 3]]);
        assert_eq!(s.cost(&out).unwrap(), Cents(8));
        assert!((s.effect(&out).unwrap() - 2.8).abs() < 1e-12);
    }

    #[test]
    fn ample_budget_reaches_all_best() {
        for p in 0..2 {
            let s = spec(p, 20);
            assert_eq!(greedy_improve(&s, &s.cheapest()).unwrap(), s.all_best());
        }
    }

    #[test]
    fn no_slack_returns_input() {
        let s = spec(1, 4);
        assert_eq!(greedy_improve(&s, &s.cheapest()).unwrap(), s.cheapest());
    }

    #[test]
    fn over_budget_start_is_contract_error() {
        let s = spec(1, 3);
        assert!(matches!(greedy_improve(&s, &s.cheapest()), Err(Error::Contract(_))));
    }
}
