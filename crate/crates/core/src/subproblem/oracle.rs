//! Exhaustive enumeration of subproblem solutions.

use serde::Serialize;

use super::{solve_subproblem, Layout, SubproblemSolution, SubproblemSpec, TabuConfig};
use crate::error::{Error, Result};
use crate::money::Cents;
use crate::rng::derive_seed;

/// Largest search space the oracle accepts.
pub const ORACLE_LIMIT: f64 = 1e8;

/// Relative tolerance under which two effects count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome {
    pub solution: SubproblemSolution,
    pub effect: f64,
    pub cost: Cents,
    /// Complete solutions whose effect was evaluated.
    pub evaluated: u64,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of solutions ignoring the budget:
/// `prod_j C(r + |alts_j| - 1, |alts_j| - 1)`.
pub fn oracle_size(spec: &SubproblemSpec) -> f64 {
    spec.items
        .iter()
        .map(|i| {
            let k = i.alternatives.len() as u64 - 1;
            binomial(spec.cases + k, k)
        })
        .product()
}

/// Every way to split `cases` over `parts` alternatives, with its cost.
fn compositions(spec: &SubproblemSpec, j: usize) -> Vec<(Vec<u64>, Cents)> {
    fn rec(spec: &SubproblemSpec, j: usize, left: u64, row: &mut Vec<u64>, out: &mut Vec<(Vec<u64>, Cents)>) {
        let alts = &spec.items[j].alternatives;
        if row.len() + 1 == alts.len() {
            row.push(left);
            let cost = alts.iter().zip(row.iter()).map(|(a, &n)| a.case_cost.times(n.saturating_sub(a.storage))).sum();
            out.push((row.clone(), cost));
            row.pop();
            return;
        }
        for n in (0..=left).rev() {
            row.push(n);
            rec(spec, j, left - n, row, out);
            row.pop();
        }
    }
    let mut out = Vec::new();
    rec(spec, j, spec.cases, &mut Vec::new(), &mut out);
    out
}

struct Search<'a> {
    spec: &'a SubproblemSpec,
    rows: Vec<Vec<(Vec<u64>, Cents)>>,
    /// Cheapest possible cost of items `j..`.
    floor: Vec<Cents>,
    chosen: Vec<usize>,
    best: Option<(SubproblemSolution, f64, Cents)>,
    evaluated: u64,
}

impl Search<'_> {
    fn run(&mut self, j: usize, spent: Cents) {
        if j == self.rows.len() {
            self.leaf(spent);
            return;
        }
        for i in 0..self.rows[j].len() {
            let cost = self.rows[j][i].1;
            if spent + cost + self.floor[j + 1] > self.spec.budget {
                continue;
            }
            self.chosen.push(i);
            self.run(j + 1, spent + cost);
            self.chosen.pop();
        }
    }

    fn leaf(&mut self, cost: Cents) {
        self.evaluated += 1;
        let z = SubproblemSolution::new(
            self.chosen.iter().enumerate().map(|(j, &i)| self.rows[j][i].0.clone()).collect(),
        );
        let effect = Layout::new(z.clone()).effect(self.spec);
        let replace = match &self.best {
            None => true,
            Some((bz, be, bc)) => {
                let tol = TIE_TOLERANCE * be.abs().max(1.0);
                effect > be + tol || ((effect - be).abs() <= tol && (cost < *bc || (cost == *bc && z < *bz)))
            }
        };
        if replace {
            self.best = Some((z, effect, cost));
        }
    }
}

/// Finds the most effective solution within budget by enumeration; ties
/// go to the cheaper solution, then the lexicographically smaller one.
pub fn oracle_solve(spec: &SubproblemSpec) -> Result<OracleOutcome> {
    let estimate = oracle_size(spec);
    if estimate > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            estimate,
            limit: ORACLE_LIMIT,
        });
    }
    let rows: Vec<_> = (0..spec.items.len()).map(|j| compositions(spec, j)).collect();
    let mut floor = vec![Cents::ZERO; rows.len() + 1];
    for j in (0..rows.len()).rev() {
        floor[j] = floor[j + 1] + rows[j].iter().map(|r| r.1).min().expect("nonempty");
    }
    let mut search = Search {
        spec,
        rows,
        floor,
        chosen: Vec::new(),
        best: None,
        evaluated: 0,
    };
    search.run(0, Cents::ZERO);
    let (solution, effect, cost) = search
        .best
        .ok_or_else(|| Error::Contract(format!("no solution fits the budget of {}", spec.budget)))?;
    Ok(OracleOutcome {
        solution,
        effect,
        cost,
        evaluated: search.evaluated,
    })
}

/// One seeded solver run measured against the enumerated optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRun {
    pub seed: u64,
    pub effect: f64,
    pub matched: bool,
    /// Tabu iteration at which the returned solution was first reached.
    pub best_iteration: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleComparison {
    pub optimum: f64,
    pub evaluated: u64,
    pub runs: Vec<OracleRun>,
}

impl OracleComparison {
    pub fn success_rate(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().filter(|r| r.matched).count() as f64 / self.runs.len() as f64
    }

    /// Median iterations-to-optimum over the runs that matched (upper
    /// median for even counts).
    pub fn median_iterations(&self) -> Option<usize> {
        let mut its: Vec<usize> = self.runs.iter().filter(|r| r.matched).map(|r| r.best_iteration).collect();
        its.sort_unstable();
        its.get(its.len() / 2).copied()
    }
}

/// Runs the full solver `runs` times, run `i` seeded with
/// `derive_seed(config.seed, i)`, and compares each result with the
/// enumerated optimum.
pub fn compare_with_oracle(spec: &SubproblemSpec, config: &TabuConfig, runs: usize) -> Result<OracleComparison> {
    let optimum = oracle_solve(spec)?;
    let tol = TIE_TOLERANCE * optimum.effect.abs().max(1.0);
    let runs = (0..runs as u64)
        .map(|i| {
            let seed = derive_seed(config.seed, i);
            let out = solve_subproblem(spec, &TabuConfig { seed, ..config.clone() })?;
            Ok(OracleRun {
                seed,
                effect: out.effect,
                matched: out.effect >= optimum.effect - tol,
                best_iteration: out.best_iteration,
                iterations: out.iterations,
            })
        })
        .collect::<Result<_>>()?;
    Ok(OracleComparison {
        optimum: optimum.effect,
        evaluated: optimum.evaluated,
        runs,
    })
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
        assert_eq!(oracle_size(&s), 5.0);
        let out = oracle_solve(&s).unwrap();
        assert_eq!(out.solution.counts(), &[vec![1, 3]]);
        assert!((out.effect - 2.8).abs() < 1e-12);
    }

    #[test]
    fn lower_budget_gives_cheapest() {
        let s = spec(1, 4);
        assert_eq!(oracle_solve(&s).unwrap().solution, s.cheapest());
    }

    #[test]
    fn budget_monotone() {
        let effects: Vec<f64> = (4..=20).map(|b| oracle_solve(&spec(1, b)).unwrap().effect).collect();
        assert!(effects.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn refuses_large_spaces() {
        let mut s = spec(1, 9);
        s.cases = 100_000_000;
        assert!(matches!(oracle_solve(&s), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn tiny_runs_all_match() {
        let cmp = compare_with_oracle(&spec(1, 9), &TabuConfig::with_seed(3), 50).unwrap();
        assert_eq!(cmp.runs.len(), 50);
        assert_eq!(cmp.success_rate(), 1.0);
        assert_eq!(cmp.median_iterations(), Some(0));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(12, 4), 495.0);
        assert_eq!(binomial(7, 0), 1.0);
    }
}
