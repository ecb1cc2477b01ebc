//! NSGA-II with constrained domination.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::evaluator::Evaluated;
use super::operators::{crowding_distance, mutate, nondominated_sort, sbx, Fitness};
use super::{RunConfig, RunOutcome, Session};
use crate::error::Result;
use crate::instance::ProcurementInstance;

struct Member {
    genome: Vec<f64>,
    eval: Arc<Evaluated>,
}

/// Rank and crowding distance of every member.
fn rank(population: &[Member]) -> (Vec<usize>, Vec<f64>) {
    let fitness: Vec<Fitness> = population.iter().map(|m| m.eval.fitness()).collect();
    let mut ranks = vec![0; population.len()];
    let mut crowding = vec![0.0; population.len()];
    for (r, front) in nondominated_sort(&fitness).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(&fitness, front)) {
            ranks[i] = r;
            crowding[i] = d;
        }
    }
    (ranks, crowding)
}

/// Keeps the best `size` members by front, then crowding distance.
fn select(mut pool: Vec<Member>, size: usize) -> Vec<Member> {
    let fitness: Vec<Fitness> = pool.iter().map(|m| m.eval.fitness()).collect();
    let mut keep = Vec::with_capacity(size);
    for front in nondominated_sort(&fitness) {
        if keep.len() + front.len() <= size {
            keep.extend(front);
            continue;
        }
        let distance = crowding_distance(&fitness, &front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| distance[b].total_cmp(&distance[a]).then(a.cmp(&b)));
        keep.extend(order.into_iter().take(size - keep.len()).map(|i| front[i]));
        break;
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Member>> = pool.drain(..).map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("selected once")).collect()
}

fn tournament(rng: &mut ChaCha8Rng, ranks: &[usize], crowding: &[f64]) -> usize {
    let a = rng.random_range(0..ranks.len());
    let b = rng.random_range(0..ranks.len());
    if ranks[b] < ranks[a] || (ranks[b] == ranks[a] && crowding[b] > crowding[a]) {
        b
    } else {
        a
    }
}

/// NSGA-II: binary tournaments on rank and crowding, SBX and uniform
/// mutation, elitist selection over parents plus offspring. Every feasible
/// evaluated point is offered to the returned archive.
pub fn nsga2_run(instance: &ProcurementInstance, config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut session = Session::start(instance, config)?;
    let bounds = session.evaluator.gene_bounds();
    let mutation = config.mutation_probability(bounds.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let initial: Vec<Vec<f64>> = (0..config.population).map(|_| bounds.random(&mut rng)).collect();
    let mut population = evaluate(&mut session, initial)?;

    while !session.finished() && !population.is_empty() {
        let (ranks, crowding) = rank(&population);
        let mut offspring = Vec::with_capacity(config.population + 1);
        while offspring.len() < config.population {
            let a = &population[tournament(&mut rng, &ranks, &crowding)].genome;
            let b = &population[tournament(&mut rng, &ranks, &crowding)].genome;
            let (mut c, mut d) = sbx(&mut rng, a, b, &bounds, config.crossover_eta, config.crossover_probability);
            mutate(&mut rng, &mut c, &bounds, mutation);
            mutate(&mut rng, &mut d, &bounds, mutation);
            offspring.push(c);
            offspring.push(d);
        }
        offspring.truncate(config.population);
        let children = evaluate(&mut session, offspring)?;
        if children.is_empty() {
            break;
        }
        population.extend(children);
        population = select(population, config.population);
        session.generations += 1;
        debug_assert!(session.archive.is_mutually_nondominated());
    }
    Ok(session.finish())
}

/// Evaluates within the remaining budget and records feasible results.
fn evaluate(session: &mut Session, mut genomes: Vec<Vec<f64>>) -> Result<Vec<Member>> {
    genomes.truncate(session.remaining());
    let evals = session.evaluator.evaluate_batch(&genomes)?;
    let members: Vec<Member> = genomes
        .into_iter()
        .zip(evals)
        .filter_map(|(genome, eval)| eval.map(|eval| Member { genome, eval }))
        .collect();
    for m in &members {
        session.offer(&m.genome, &m.eval);
    }
    Ok(members)
}

