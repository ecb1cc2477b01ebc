//! Rank-aligned case layout with incremental effect deltas.

use super::{SubproblemSolution, SubproblemSpec};

/// A solution together with per-item prefix sums, so the alternative used
/// by any case is a short scan away.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    z: SubproblemSolution,
    /// `ends[j][k]`: one past the last case that uses alternative `k`.
    ends: Vec<Vec<u64>>,
    scratch: Vec<f64>,
}

impl Layout {
    pub(crate) fn new(z: SubproblemSolution) -> Self {
        let ends = z
            .counts
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0u64, |acc, &n| {
                        *acc += n;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let scratch = vec![0.0; z.counts.len()];
        Layout { z, ends, scratch }
    }

    pub(crate) fn solution(&self) -> &SubproblemSolution {
        &self.z
    }

    pub(crate) fn count(&self, j: usize, k: usize) -> u64 {
        self.z.counts[j][k]
    }

    /// Summed per-case effect, accumulated case by case in rank order.
    pub(crate) fn effect(&self, spec: &SubproblemSpec) -> f64 {
        let mut scratch = vec![0.0; self.ends.len()];
        let mut pointers = vec![0usize; self.ends.len()];
        let mut total = 0.0;
        let mut cursor = 0;
        while cursor < spec.cases {
            let mut next = spec.cases;
            for (j, ends) in self.ends.iter().enumerate() {
                while ends[pointers[j]] <= cursor {
                    pointers[j] += 1;
                }
                scratch[j] = spec.items[j].alternatives[pointers[j]].effect;
                next = next.min(ends[pointers[j]]);
            }
            let value = spec.effect_fn.eval(&scratch);
            for _ in cursor..next {
                total += value;
            }
            cursor = next;
        }
        total
    }

    fn case_value(&mut self, spec: &SubproblemSpec, case: u64) -> f64 {
        for (j, ends) in self.ends.iter().enumerate() {
            let k = ends.iter().position(|&e| e > case).expect("case within range");
            self.scratch[j] = spec.items[j].alternatives[k].effect;
        }
        spec.effect_fn.eval(&self.scratch)
    }

    /// Moves one case of item `j` from alternative `from` to `to`.
    pub(crate) fn shift(&mut self, j: usize, from: usize, to: usize) {
        self.z.counts[j][from] -= 1;
        self.z.counts[j][to] += 1;
        if from < to {
            self.ends[j][from..to].iter_mut().for_each(|e| *e -= 1);
        } else {
            self.ends[j][to..from].iter_mut().for_each(|e| *e += 1);
        }
    }

    /// Cases whose alternative in item `j` changes under `shift(j, from, to)`.
    pub(crate) fn affected(&self, j: usize, from: usize, to: usize) -> Vec<u64> {
        let mut cases: Vec<u64> = if from < to {
            self.ends[j][from..to].iter().map(|&e| e - 1).collect()
        } else {
            self.ends[j][to..from].to_vec()
        };
        cases.dedup();
        cases
    }

    /// Whether `shift(j, from, to)` would change any of `cases`.
    pub(crate) fn touches(&self, j: usize, from: usize, to: usize, cases: &[u64]) -> bool {
        if from < to {
            self.ends[j][from..to].iter().any(|&e| cases.contains(&(e - 1)))
        } else {
            self.ends[j][to..from].iter().any(|e| cases.contains(e))
        }
    }

    /// Applies `shift(j, from, to)` and returns the effect change.
    pub(crate) fn step(&mut self, spec: &SubproblemSpec, j: usize, from: usize, to: usize) -> f64 {
        let cases = self.affected(j, from, to);
        let before: f64 = cases.iter().map(|&c| self.case_value(spec, c)).sum();
        self.shift(j, from, to);
        let after: f64 = cases.iter().map(|&c| self.case_value(spec, c)).sum();
        after - before
    }

    /// Effect change of `shift(j, from, to)`, leaving the layout untouched.
    pub(crate) fn probe(&mut self, spec: &SubproblemSpec, j: usize, from: usize, to: usize) -> f64 {
        let delta = self.step(spec, j, from, to);
        self.shift(j, to, from);
        delta
    }
}
