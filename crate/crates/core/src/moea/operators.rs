//! Variation and ranking shared by both engines.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::{dominates, Point};

/// Box constraints of a genome; integer genomes are rounded after every
/// variation.
#[derive(Clone, Debug)]
pub(crate) struct GeneBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: bool,
}

impl GeneBounds {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn random(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.len()).map(|k| self.random_gene(rng, k)).collect()
    }

    fn random_gene(&self, rng: &mut ChaCha8Rng, k: usize) -> f64 {
        let (lo, hi) = (self.lower[k], self.upper[k]);
        if hi <= lo {
            lo
        } else if self.integer {
            rng.random_range(lo as i64..=hi as i64) as f64
        } else {
            rng.random_range(lo..=hi)
        }
    }

    /// Reflects out-of-box values back inside, then rounds integer genes.
    fn settle(&self, genome: &mut [f64]) {
        for (k, v) in genome.iter_mut().enumerate() {
            let (lo, hi) = (self.lower[k], self.upper[k]);
            if *v < lo {
                *v = lo + (lo - *v);
            }
            if *v > hi {
                *v = hi - (*v - hi);
            }
            *v = v.clamp(lo, hi);
            if self.integer {
                *v = v.round().clamp(lo, hi);
            }
        }
    }
}

/// Bounded simulated binary crossover with distribution index `eta`.
pub(crate) fn sbx(
    rng: &mut ChaCha8Rng,
    a: &[f64],
    b: &[f64],
    bounds: &GeneBounds,
    eta: f64,
    probability: f64,
) -> (Vec<f64>, Vec<f64>) {
    let (mut c1, mut c2) = (a.to_vec(), b.to_vec());
    if rng.random::<f64>() < probability {
        for k in 0..a.len() {
            if rng.random_bool(0.5) || (a[k] - b[k]).abs() <= 1e-14 {
                continue;
            }
            let (lo, hi) = (bounds.lower[k], bounds.upper[k]);
            let (y1, y2) = (a[k].min(b[k]), a[k].max(b[k]));
            let u: f64 = rng.random();
            let spread = |beta: f64| {
                let alpha = 2.0 - beta.powf(-(eta + 1.0));
                if u <= 1.0 / alpha {
                    (u * alpha).powf(1.0 / (eta + 1.0))
                } else {
                    (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
                }
            };
            let q1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
            let q2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
            let v1 = (0.5 * ((y1 + y2) - q1 * (y2 - y1))).clamp(lo, hi);
            let v2 = (0.5 * ((y1 + y2) + q2 * (y2 - y1))).clamp(lo, hi);
            if rng.random_bool(0.5) {
                (c1[k], c2[k]) = (v2, v1);
            } else {
                (c1[k], c2[k]) = (v1, v2);
            }
        }
    }
    bounds.settle(&mut c1);
    bounds.settle(&mut c2);
    (c1, c2)
}

/// Redraws each gene uniformly within its bounds with `probability`.
pub(crate) fn mutate(rng: &mut ChaCha8Rng, genome: &mut [f64], bounds: &GeneBounds, probability: f64) {
    for (k, gene) in genome.iter_mut().enumerate() {
        if rng.random::<f64>() < probability {
            *gene = bounds.random_gene(rng, k);
        }
    }
    bounds.settle(genome);
}

/// Objectives and total constraint violation of one individual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fitness {
    pub objectives: Point,
    pub violation: f64,
}

impl Fitness {
    pub fn is_feasible(&self) -> bool {
        self.violation <= 0.0
    }
}

/// Feasible beats infeasible, the smaller violation wins between two
/// infeasible individuals, and Pareto dominance decides between feasible
/// ones.
pub fn constrained_dominates(a: &Fitness, b: &Fitness) -> bool {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => dominates(a.objectives, b.objectives),
    }
}

/// Fronts of the constrained-domination order, best first.
pub(crate) fn nondominated_sort(fitness: &[Fitness]) -> Vec<Vec<usize>> {
    let n = fitness.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if constrained_dominates(&fitness[i], &fitness[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if constrained_dominates(&fitness[j], &fitness[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of every member of `front`, in front order.
pub(crate) fn crowding_distance(fitness: &[Fitness], front: &[usize]) -> Vec<f64> {
    let mut distance = vec![0.0; front.len()];
    if front.len() <= 2 {
        distance.iter_mut().for_each(|d| *d = f64::INFINITY);
        return distance;
    }
    let objective = |i: usize, m: usize| {
        let p = fitness[front[i]].objectives;
        if m == 0 {
            p.0
        } else {
            p.1
        }
    };
    for m in 0..2 {
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| objective(a, m).total_cmp(&objective(b, m)).then(a.cmp(&b)));
        let (low, high) = (objective(order[0], m), objective(order[front.len() - 1], m));
        distance[order[0]] = f64::INFINITY;
        distance[order[front.len() - 1]] = f64::INFINITY;
        if high > low {
            for w in 1..front.len() - 1 {
                distance[order[w]] += (objective(order[w + 1], m) - objective(order[w - 1], m)) / (high - low);
            }
        }
    }
    distance
}
