//! MOEA/D with normalized Tchebycheff scalarization.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::evaluator::Evaluated;
use super::operators::{mutate, sbx};
use super::{RunConfig, RunOutcome, Session};
use crate::error::Result;
use crate::instance::ProcurementInstance;
use crate::metrics::Point;

/// Evenly spread weights `(i/(N-1), 1 - i/(N-1))`; a single vector is
/// `(0.5, 0.5)`.
pub(crate) fn weight_vectors(n: usize) -> Vec<Point> {
    if n == 1 {
        return vec![(0.5, 0.5)];
    }
    (0..n)
        .map(|i| {
            let a = i as f64 / (n - 1) as f64;
            (a, 1.0 - a)
        })
        .collect()
}

/// The `size` nearest weight vectors of each vector, itself included.
pub(crate) fn neighborhoods(weights: &[Point], size: usize) -> Vec<Vec<usize>> {
    weights
        .iter()
        .map(|w| {
            let mut order: Vec<usize> = (0..weights.len()).collect();
            let dist = |j: usize| (weights[j].0 - w.0).powi(2) + (weights[j].1 - w.1).powi(2);
            order.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)).then(a.cmp(&b)));
            order.truncate(size);
            order
        })
        .collect()
}

struct Scale {
    ideal: Point,
    nadir: Point,
    budget: f64,
}

impl Scale {
    /// Tchebycheff distance to the ideal point with objectives scaled by the
    /// population's range, plus violation in units of the budget.
    fn score(&self, weight: Point, eval: &Evaluated) -> f64 {
        let span = |hi: f64, lo: f64| (hi - lo).max(1e-12);
        let f = eval.objectives;
        let a = weight.0.max(1e-6) * (self.ideal.0 - f.0) / span(self.ideal.0, self.nadir.0);
        let b = weight.1.max(1e-6) * (self.ideal.1 - f.1) / span(self.ideal.1, self.nadir.1);
        a.max(b) + eval.violation / self.budget.max(1.0)
    }
}

/// MOEA/D: one subproblem per weight vector, mating and replacement within
/// neighborhoods, an external archive of feasible nondominated points.
/// Children of one generation are evaluated together, then applied in
/// subproblem order.
pub fn moead_run(instance: &ProcurementInstance, config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut session = Session::start(instance, config)?;
    let bounds = session.evaluator.gene_bounds();
    let mutation = config.mutation_probability(bounds.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.population;
    let weights = weight_vectors(n);
    let neighbors = neighborhoods(&weights, config.neighborhood_size());

    let mut genomes: Vec<Vec<f64>> = (0..n).map(|_| bounds.random(&mut rng)).collect();
    genomes.truncate(session.remaining());
    let mut evals: Vec<Arc<Evaluated>> = Vec::with_capacity(n);
    for (g, e) in genomes.iter().zip(session.evaluator.evaluate_batch(&genomes)?) {
        let Some(e) = e else { break };
        session.offer(g, &e);
        evals.push(e);
    }
    if evals.len() < n {
        return Ok(session.finish());
    }
    let mut ideal = evals.iter().fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |z, e| {
        (z.0.max(e.objectives.0), z.1.max(e.objectives.1))
    });

    while !session.finished() {
        let mut children = Vec::with_capacity(n);
        for hood in &neighbors {
            let a = hood[rng.random_range(0..hood.len())];
            let b = hood[rng.random_range(0..hood.len())];
            let (mut c, _) = sbx(&mut rng, &genomes[a], &genomes[b], &bounds, config.crossover_eta, config.crossover_probability);
            mutate(&mut rng, &mut c, &bounds, mutation);
            children.push(c);
        }
        children.truncate(session.remaining());
        let results = session.evaluator.evaluate_batch(&children)?;
        if results.iter().all(|r| r.is_none()) {
            break;
        }
        let nadir = evals.iter().fold((f64::INFINITY, f64::INFINITY), |z, e| {
            (z.0.min(e.objectives.0), z.1.min(e.objectives.1))
        });
        for (i, (child, result)) in children.into_iter().zip(results).enumerate() {
            let Some(eval) = result else { continue };
            session.offer(&child, &eval);
            ideal = (ideal.0.max(eval.objectives.0), ideal.1.max(eval.objectives.1));
            let scale = Scale {
                ideal,
                nadir,
                budget: session.evaluator.budget(),
            };
            let mut hood = neighbors[i].clone();
            hood.shuffle(&mut rng);
            let mut replaced = 0;
            for j in hood {
                if replaced == config.replacement_limit {
                    break;
                }
                if scale.score(weights[j], &eval) < scale.score(weights[j], &evals[j]) {
                    genomes[j] = child.clone();
                    evals[j] = Arc::clone(&eval);
                    replaced += 1;
                }
            }
        }
        session.generations += 1;
        debug_assert!(session.archive.is_mutually_nondominated());
    }
    Ok(session.finish())
}
