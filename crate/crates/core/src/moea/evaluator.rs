//! Genome decoding and batch evaluation in either search space.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::operators::{Fitness, GeneBounds};
use super::{repair_allocation, ArchiveEntry, Space};
use crate::error::{Error, Result};
use crate::instance::ProcurementInstance;
use crate::metrics::Point;
use crate::plan::{BudgetAllocation, PurchasePlan};
use crate::rng::derive_seed;
use crate::simulation::{check_feasibility, evaluate_original, top_up};
use crate::subproblem::{SubproblemSolution, TabuConfig, TransformedProblem};

/// Shared supplies let one profile consume stock bought for another, so
/// decoded plans are topped up until the lower-bound cases are covered.
const TOP_UP_ROUNDS: usize = 8;

/// Everything learned from evaluating one decoded genome.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluated {
    pub objectives: Point,
    pub plan_objectives: Point,
    /// Budget excess plus the budget per violated treatment flag.
    pub violation: f64,
    pub plan: PurchasePlan,
    pub allocation: Option<BudgetAllocation>,
    pub solutions: Option<Vec<SubproblemSolution>>,
}

impl Evaluated {
    pub fn fitness(&self) -> Fitness {
        Fitness {
            objectives: self.objectives,
            violation: self.violation,
        }
    }

    pub fn entry(&self, genome: &[f64]) -> ArchiveEntry {
        ArchiveEntry {
            objectives: self.plan_objectives,
            search_objectives: self.objectives,
            genome: genome.to_vec(),
            plan: self.plan.clone(),
            allocation: self.allocation.clone(),
            solutions: self.solutions.clone(),
        }
    }
}

pub(crate) struct Evaluator<'a> {
    instance: &'a ProcurementInstance,
    problem: TransformedProblem<'a>,
    space: Space,
    tabu: TabuConfig,
    seed: u64,
    pool: rayon::ThreadPool,
    /// Transformed-space results keyed by the repaired allocation.
    cache: HashMap<Vec<i64>, Arc<Evaluated>>,
    deadline: Option<Instant>,
    pub evaluations: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        instance: &'a ProcurementInstance,
        space: Space,
        tabu: TabuConfig,
        seed: u64,
        threads: usize,
        deadline: Option<Instant>,
    ) -> Result<Self> {
        let problem = TransformedProblem::new(instance);
        if space == Space::Transformed {
            problem.budget_bounds.ensure_feasible()?;
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Evaluator {
            instance,
            problem,
            space,
            tabu,
            seed,
            pool,
            cache: HashMap::new(),
            deadline,
            evaluations: 0,
        })
    }

    pub fn gene_bounds(&self) -> GeneBounds {
        match self.space {
            Space::Original => GeneBounds {
                lower: self.problem.x_bounds.x_lower.iter().map(|&v| v as f64).collect(),
                upper: self.problem.x_bounds.x_upper.iter().map(|&v| v as f64).collect(),
                integer: true,
            },
            Space::Transformed => {
                let n = self.problem.budget_bounds.len();
                GeneBounds {
                    lower: vec![0.0; n],
                    upper: vec![1.0; n],
                    integer: false,
                }
            }
        }
    }

    pub fn budget(&self) -> f64 {
        self.instance.budget.get() as f64
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// The decision a genome stands for: a purchase plan in the original
    /// space, a repaired allocation in the transformed one. Slack fractions
    /// map onto equal-width cells, one per cent of slack.
    fn decode(&self, genome: &[f64]) -> Result<Vec<i64>> {
        match self.space {
            Space::Original => Ok(genome.iter().map(|&g| g.round() as i64).collect()),
            Space::Transformed => {
                let b = &self.problem.budget_bounds;
                let raw: Vec<f64> = genome
                    .iter()
                    .zip(b.y_lower.iter().zip(&b.y_upper))
                    .map(|(&g, (lo, hi))| lo.get() as f64 + g * (hi.get() - lo.get() + 1) as f64)
                    .collect();
                Ok(repair_allocation(&raw, b)?.0.iter().map(|c| c.get()).collect())
            }
        }
    }

    fn evaluate_decision(&self, decision: &[i64]) -> Result<Evaluated> {
        let (objectives, plan, allocation, solutions) = match self.space {
            Space::Original => {
                let plan = PurchasePlan(decision.iter().map(|&v| v as u64).collect());
                let r = evaluate_original(self.instance, &plan)?;
                ((r.epidemic_effect, r.treatment_effect), plan, None, None)
            }
            Space::Transformed => {
                let seed = decision.iter().fold(self.seed, |acc, &v| derive_seed(acc, v as u64));
                let config = TabuConfig {
                    seed,
                    ..self.tabu.clone()
                };
                let eval = self.problem.evaluate(&BudgetAllocation::from_cents(decision), &config)?;
                let plan = top_up(self.instance, &self.problem.decode(&eval.solutions), TOP_UP_ROUNDS)?;
                (
                    (eval.epidemic_effect, eval.treatment_effect),
                    plan,
                    Some(eval.allocation),
                    Some(eval.solutions),
                )
            }
        };
        let plan_objectives = match self.space {
            Space::Original => objectives,
            Space::Transformed => {
                let r = evaluate_original(self.instance, &plan)?;
                (r.epidemic_effect, r.treatment_effect)
            }
        };
        let violation = check_feasibility(self.instance, &plan)?.violation(self.instance.budget);
        Ok(Evaluated {
            objectives,
            plan_objectives,
            violation,
            plan,
            allocation,
            solutions,
        })
    }

    /// Evaluates `genomes` in parallel, in order. Entries come back `None`
    /// once the deadline has passed.
    pub fn evaluate_batch(&mut self, genomes: &[Vec<f64>]) -> Result<Vec<Option<Arc<Evaluated>>>> {
        let decisions: Vec<Vec<i64>> = genomes.iter().map(|g| self.decode(g)).collect::<Result<_>>()?;
        let caching = self.space == Space::Transformed;
        let mut pending: Vec<&Vec<i64>> = Vec::new();
        for d in &decisions {
            if !(caching && self.cache.contains_key(d)) && !pending.contains(&d) {
                pending.push(d);
            }
        }
        let this = &*self;
        let fresh: Vec<Option<Result<Evaluated>>> = self.pool.install(|| {
            pending
                .par_iter()
                .map(|d| (!this.expired()).then(|| this.evaluate_decision(d)))
                .collect()
        });
        let mut computed: HashMap<&Vec<i64>, Arc<Evaluated>> = HashMap::new();
        for (d, result) in pending.iter().zip(fresh) {
            if let Some(result) = result {
                computed.insert(d, Arc::new(result?));
            }
        }
        let out: Vec<Option<Arc<Evaluated>>> = decisions
            .iter()
            .map(|d| computed.get(d).or_else(|| self.cache.get(d)).cloned())
            .collect();
        if caching {
            for (d, e) in computed {
                self.cache.insert(d.clone(), e);
            }
        }
        self.evaluations += out.iter().filter(|e| e.is_some()).count() as u64;
        Ok(out)
    }
}
