//! Tabu search over case-exchange moves.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::greedy::{greedy_improve, GAIN_TOLERANCE};
use super::{debug_check, Layout, SubproblemSolution, SubproblemSpec};
use crate::error::{Error, Result};
use crate::money::Cents;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabuConfig {
    /// Moves sampled per iteration; `None` means `2D`.
    pub neighborhood_size: Option<usize>,
    pub tabu_length: usize,
    /// `None` means `50D`.
    pub max_iterations: Option<usize>,
    /// Stop after this many iterations without a new best.
    pub stall_limit: Option<usize>,
    pub seed: u64,
}

impl Default for TabuConfig {
    fn default() -> Self {
        TabuConfig {
            neighborhood_size: None,
            tabu_length: 12,
            max_iterations: None,
            stall_limit: None,
            seed: 0,
        }
    }
}

impl TabuConfig {
    pub fn with_seed(seed: u64) -> Self {
        TabuConfig {
            seed,
            ..TabuConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let zero = |v: Option<usize>| v == Some(0);
        if zero(self.neighborhood_size) || zero(self.max_iterations) || zero(self.stall_limit) || self.tabu_length == 0
        {
            return Err(Error::Config("tabu parameters must be positive".into()));
        }
        Ok(())
    }

    fn neighborhood(&self, dimension: usize) -> usize {
        self.neighborhood_size.unwrap_or(2 * dimension).max(1)
    }

    fn iterations(&self, dimension: usize) -> usize {
        self.max_iterations.unwrap_or(50 * dimension).max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TabuOutcome {
    pub solution: SubproblemSolution,
    pub effect: f64,
    pub cost: Cents,
    /// Iteration at which the returned solution was first reached; 0 if it
    /// is the starting point.
    pub best_iteration: usize,
    pub iterations: usize,
    /// Best effect after every iteration.
    pub trace: Vec<f64>,
}

/// One case of `item` moving from alternative `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Shift {
    item: usize,
    from: usize,
    to: usize,
}

impl Shift {
    fn reversed(self) -> Shift {
        Shift {
            from: self.to,
            to: self.from,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Move {
    Step(Shift),
    /// A downgrade paired with an upgrade.
    Exchange(Shift, Shift),
}

impl Move {
    fn shifts(self) -> ([Shift; 2], usize) {
        match self {
            Move::Step(s) => ([s, s], 1),
            Move::Exchange(down, up) => ([down, up], 2),
        }
    }
}

/// Cost change of `mv`, or `None` if it would drive a count negative.
fn move_cost(spec: &SubproblemSpec, layout: &Layout, mv: Move) -> Option<Cents> {
    let (shifts, n) = mv.shifts();
    let mut changes: [(usize, usize, i64); 4] = [(0, 0, 0); 4];
    let mut delta = Cents::ZERO;
    for (i, s) in shifts[..n].iter().enumerate() {
        changes[2 * i] = (s.item, s.from, -1);
        changes[2 * i + 1] = (s.item, s.to, 1);
    }
    for i in 0..2 * n {
        let (j, k, d) = changes[i];
        let prior: i64 = changes[..i].iter().filter(|c| c.0 == j && c.1 == k).map(|c| c.2).sum();
        let current = layout.count(j, k) as i64 + prior;
        if current + d < 0 {
            return None;
        }
        delta += spec.component_cost_delta(j, k, current as u64, d);
    }
    Some(delta)
}

fn probe(spec: &SubproblemSpec, layout: &mut Layout, mv: Move) -> f64 {
    let (shifts, n) = mv.shifts();
    let mut gain = 0.0;
    for s in &shifts[..n] {
        gain += layout.step(spec, s.item, s.from, s.to);
    }
    for s in shifts[..n].iter().rev() {
        layout.shift(s.item, s.to, s.from);
    }
    gain
}

fn apply(layout: &mut Layout, mv: Move) {
    let (shifts, n) = mv.shifts();
    for s in &shifts[..n] {
        layout.shift(s.item, s.from, s.to);
    }
}

fn all_moves(spec: &SubproblemSpec) -> Vec<Move> {
    let downgrades: Vec<Shift> = spec
        .items
        .iter()
        .enumerate()
        .flat_map(|(item, it)| {
            let n = it.alternatives.len();
            (0..n).flat_map(move |from| (from + 1..n).map(move |to| Shift { item, from, to }))
        })
        .collect();
    let mut moves = Vec::with_capacity(downgrades.len() * (downgrades.len() + 2));
    for &s in &downgrades {
        moves.push(Move::Step(s));
        moves.push(Move::Step(s.reversed()));
    }
    for &down in &downgrades {
        for &up in &downgrades {
            let up = up.reversed();
            if up != down.reversed() {
                moves.push(Move::Exchange(down, up));
            }
        }
    }
    moves
}

/// Additive hashing of solutions: the fingerprint is the wrapping sum of
/// `count * key` over all components, so a move updates it in O(1).
struct SolutionKeys {
    keys: Vec<Vec<u64>>,
}

impl SolutionKeys {
    fn new(spec: &SubproblemSpec, rng: &mut ChaCha8Rng) -> Self {
        SolutionKeys {
            keys: spec
                .items
                .iter()
                .map(|item| item.alternatives.iter().map(|_| rng.random()).collect())
                .collect(),
        }
    }

    fn fingerprint(&self, z: &SubproblemSolution) -> u64 {
        self.keys
            .iter()
            .zip(z.counts())
            .flat_map(|(keys, row)| keys.iter().zip(row))
            .fold(0u64, |acc, (&key, &n)| acc.wrapping_add(key.wrapping_mul(n)))
    }

    fn after(&self, fingerprint: u64, mv: Move) -> u64 {
        let (shifts, n) = mv.shifts();
        shifts[..n].iter().fold(fingerprint, |acc, s| {
            acc.wrapping_sub(self.keys[s.item][s.from]).wrapping_add(self.keys[s.item][s.to])
        })
    }
}

fn relative_tolerance(reference: f64) -> f64 {
    GAIN_TOLERANCE * reference.abs().max(1.0)
}

/// Tabu search from a feasible start. Each iteration samples
/// `neighborhood_size` feasible moves and takes the best one that is not
/// tabu, or a tabu one that beats the best solution found so far. A move is
/// tabu when it returns to a solution left within the last `tabu_length`
/// iterations.
///
/// Moves shift single cases between any two alternatives of an item,
/// alone or as a downgrade paired with an upgrade.
pub fn tabu_search(spec: &SubproblemSpec, start: &SubproblemSolution, config: &TabuConfig) -> Result<TabuOutcome> {
    config.validate()?;
    let start_cost = spec.cost(start)?;
    if start_cost > spec.budget {
        return Err(Error::Contract(format!(
            "tabu start costs {start_cost}, above the budget of {}",
            spec.budget
        )));
    }
    let dimension = spec.dimension();
    let neighborhood = config.neighborhood(dimension);
    let max_iterations = config.iterations(dimension);
    let ceiling = Layout::new(spec.all_best()).effect(spec);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let moves = all_moves(spec);
    let mut layout = Layout::new(start.clone());
    let mut current_effect = layout.effect(spec);
    let mut current_cost = start_cost;
    let mut best = (layout.solution().clone(), current_effect, current_cost);
    let mut best_iteration = 0;
    let keys = SolutionKeys::new(spec, &mut rng);
    let mut fingerprint = keys.fingerprint(layout.solution());
    // Solution fingerprint -> last iteration at which returning to it is tabu.
    let mut tabu: HashMap<u64, usize> = HashMap::new();
    let mut trace = Vec::new();
    // Drawn moves in random order, without replacement: a partial
    // Fisher-Yates pass per iteration stops once enough feasible ones show up.
    let mut order: Vec<usize> = (0..moves.len()).collect();
    let mut sampled: Vec<(Move, Cents)> = Vec::with_capacity(neighborhood);
    let mut iteration = 0;

    while iteration < max_iterations && best.1 < ceiling - relative_tolerance(ceiling) {
        if config.stall_limit.is_some_and(|s| iteration - best_iteration >= s) {
            break;
        }
        iteration += 1;
        sampled.clear();
        for i in 0..order.len() {
            let j = rng.random_range(i..order.len());
            order.swap(i, j);
            let mv = moves[order[i]];
            if let Some(dc) = move_cost(spec, &layout, mv).filter(|&dc| current_cost + dc <= spec.budget) {
                sampled.push((mv, dc));
                if sampled.len() == neighborhood {
                    break;
                }
            }
        }
        if sampled.is_empty() {
            break;
        }
        let mut chosen: Option<(Move, f64, Cents)> = None;
        for &(mv, dc) in &sampled {
            let gain = probe(spec, &mut layout, mv);
            let is_tabu = tabu
                .get(&keys.after(fingerprint, mv))
                .is_some_and(|&until| until >= iteration);
            if is_tabu && current_effect + gain <= best.1 + relative_tolerance(best.1) {
                continue;
            }
            let better = match chosen {
                None => true,
                Some((_, g, c)) => gain > g + GAIN_TOLERANCE || ((gain - g).abs() <= GAIN_TOLERANCE && dc < c),
            };
            if better {
                chosen = Some((mv, gain, dc));
            }
        }
        if let Some((mv, _, dc)) = chosen {
            apply(&mut layout, mv);
            current_cost += dc;
            current_effect = layout.effect(spec);
            tabu.insert(fingerprint, iteration + config.tabu_length);
            fingerprint = keys.after(fingerprint, mv);

            if current_effect > best.1 + relative_tolerance(best.1) {
                best = (layout.solution().clone(), current_effect, current_cost);
                best_iteration = iteration;
            }
        }
        trace.push(best.1);
    }

    debug_check(spec, &best.0);
    debug_assert_eq!(spec.cost_unchecked(&best.0), best.2);
    Ok(TabuOutcome {
        solution: best.0,
        effect: best.1,
        cost: best.2,
        best_iteration,
        iterations: iteration,
        trace,
    })
}

/// The full per-profile solver: all-best if affordable, otherwise greedy
/// upgrades from the cheapest solution followed by tabu search.
pub fn solve_subproblem(spec: &SubproblemSpec, config: &TabuConfig) -> Result<TabuOutcome> {
    let all_best = spec.all_best();
    let best_cost = spec.cost_unchecked(&all_best);
    if best_cost <= spec.budget {
        let effect = Layout::new(all_best.clone()).effect(spec);
        return Ok(TabuOutcome {
            solution: all_best,
            effect,
            cost: best_cost,
            best_iteration: 0,
            iterations: 0,
            trace: Vec::new(),
        });
    }
    let start = greedy_improve(spec, &spec.cheapest())?;
    if spec.free_dimension() == 0 {
        let effect = Layout::new(start.clone()).effect(spec);
        let cost = spec.cost_unchecked(&start);
        return Ok(TabuOutcome {
            solution: start,
            effect,
            cost,
            best_iteration: 0,
            iterations: 0,
            trace: Vec::new(),
        });
    }
    tabu_search(spec, &start, config)
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
    fn single_item_reaches_budget_nine_optimum() {
        let s = spec(1, 9);
        let out = tabu_search(&s, &s.cheapest(), &TabuConfig::with_seed(1)).unwrap();
        assert_eq!(out.solution.counts(), &[vec![1, 3]]);
        assert_eq!(out.cost, Cents(8));
    }

    #[test]
    fn ample_budget_converges_to_all_best() {
        let s = spec(1, 20);
        let out = tabu_search(&s, &s.cheapest(), &TabuConfig::with_seed(3)).unwrap();
        assert_eq!(out.solution, s.all_best());
        assert!(out.iterations <= 50 * s.dimension());
    }

    #[test]
    fn never_worse_than_start() {
        let s = spec(1, 4);
        let out = tabu_search(&s, &s.cheapest(), &TabuConfig::with_seed(0)).unwrap();
        assert_eq!(out.solution, s.cheapest());
        assert_eq!(out.best_iteration, 0);
    }

    #[test]
    fn trace_is_nondecreasing() {
        let s = spec(1, 13);
        let out = tabu_search(&s, &s.cheapest(), &TabuConfig::with_seed(9)).unwrap();
        assert!(out.trace.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn fingerprint_tracks_moves() {
        let s = spec(1, 13);
        let keys = SolutionKeys::new(&s, &mut ChaCha8Rng::seed_from_u64(3));
        let mut layout = Layout::new(SubproblemSolution::new(vec![vec![1, 3]]));
        let mv = Move::Step(Shift { item: 0, from: 1, to: 0 });
        let predicted = keys.after(keys.fingerprint(layout.solution()), mv);
        apply(&mut layout, mv);
        assert_eq!(keys.fingerprint(layout.solution()), predicted);
        assert_ne!(predicted, keys.fingerprint(&SubproblemSolution::new(vec![vec![1, 3]])));
    }

    #[test]
    fn zero_parameters_rejected() {
        let config = TabuConfig {
            tabu_length: 0,
            ..TabuConfig::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }
}
