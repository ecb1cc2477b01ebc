//! Evolutionary multiobjective search in the original space (purchase
//! quantities, constrained) or the transformed space (budget allocations,
//! decoded through the subproblem solver).

mod archive;
mod evaluator;
mod moead;
mod nsga2;
mod operators;
mod repair;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use archive::{ArchiveEntry, ArchiveFile, ParetoArchive};
pub use evaluator::Evaluated;
pub use moead::moead_run;
pub use nsga2::nsga2_run;
pub use operators::{constrained_dominates, Fitness};
pub use repair::repair_allocation;

use crate::error::{Error, Result};
use crate::instance::ProcurementInstance;
use crate::subproblem::TabuConfig;
use evaluator::Evaluator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nsga2,
    Moead,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Original,
    Transformed,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Moead => "moead",
        })
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Original => "original",
            Space::Transformed => "transformed",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsga2" => Ok(Algorithm::Nsga2),
            "moead" => Ok(Algorithm::Moead),
            other => Err(Error::Config(format!("unknown algorithm `{other}` (expected nsga2 or moead)"))),
        }
    }
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Space::Original),
            "transformed" => Ok(Space::Transformed),
            other => Err(Error::Config(format!("unknown space `{other}` (expected original or transformed)"))),
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub space: Space,
    /// Population size; the weight-vector count for MOEA/D.
    pub population: usize,
    pub crossover_probability: f64,
    /// SBX distribution index.
    pub crossover_eta: f64,
    /// Per-gene mutation probability; `None` means one over the genome length.
    pub mutation_probability: Option<f64>,
    /// MOEA/D neighborhood size; `None` means 10% of the weights, at least 2.
    pub neighborhood: Option<usize>,
    /// Most neighbors a MOEA/D child may replace.
    pub replacement_limit: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub max_evaluations: Option<u64>,
    pub seed: u64,
    #[serde(skip, default = "one")]
    pub threads: usize,
    /// Subproblem solver settings; its seed is replaced per evaluation. The
    /// default runs a short tabu search after greedy.
    pub tabu: TabuConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Nsga2,
            space: Space::Transformed,
            population: 100,
            crossover_probability: 0.9,
            crossover_eta: 20.0,
            mutation_probability: None,
            neighborhood: None,
            replacement_limit: 2,
            time_limit: None,
            max_evaluations: Some(10_000),
            seed: 0,
            threads: 1,
            tabu: TabuConfig {
                max_iterations: Some(10),
                stall_limit: Some(5),
                ..TabuConfig::default()
            },
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        let min_population = match self.algorithm {
            Algorithm::Nsga2 => 2,
            Algorithm::Moead => 1,
        };
        if self.population < min_population {
            return fail(&format!("{} needs a population of at least {min_population}", self.algorithm));
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return fail("crossover probability must lie in [0, 1]");
        }
        if !(self.crossover_eta >= 0.0 && self.crossover_eta.is_finite()) {
            return fail("crossover eta must be a nonnegative number");
        }
        if self.mutation_probability.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
            return fail("mutation probability must lie in [0, 1]");
        }
        if self.neighborhood == Some(0) || self.replacement_limit == 0 {
            return fail("neighborhood and replacement limit must be positive");
        }
        match (self.time_limit, self.max_evaluations) {
            (None, None) => return fail("set a time limit, an evaluation limit, or both"),
            (Some(t), _) if !(t > 0.0 && t.is_finite()) => return fail("time limit must be positive"),
            (_, Some(0)) => return fail("evaluation limit must be positive"),
            _ => {}
        }
        if self.threads == 0 {
            return fail("threads must be positive");
        }
        self.tabu.validate()
    }

    fn mutation_probability(&self, genes: usize) -> f64 {
        self.mutation_probability.unwrap_or(1.0 / genes.max(1) as f64)
    }

    fn neighborhood_size(&self) -> usize {
        let default = (self.population as f64 * 0.1).ceil() as usize;
        self.neighborhood.unwrap_or(default.max(2)).min(self.population)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub archive: ParetoArchive,
    /// Genome evaluations, repeated genomes included.
    pub evaluations: u64,
    pub generations: u64,
    pub elapsed: Duration,
}

impl RunOutcome {
    pub fn to_file(&self, config: &RunConfig) -> ArchiveFile {
        ArchiveFile {
            algorithm: config.algorithm,
            space: config.space,
            seed: config.seed,
            evaluations: self.evaluations,
            generations: self.generations,
            config: config.clone(),
            entries: self.archive.clone(),
        }
    }
}

/// Runs the configured algorithm.
pub fn run(instance: &ProcurementInstance, config: &RunConfig) -> Result<RunOutcome> {
    match config.algorithm {
        Algorithm::Nsga2 => nsga2_run(instance, config),
        Algorithm::Moead => moead_run(instance, config),
    }
}

/// State shared by both engines: evaluator, limits and archive.
struct Session<'a> {
    evaluator: Evaluator<'a>,
    archive: ParetoArchive,
    generations: u64,
    started: Instant,
    max_evaluations: Option<u64>,
}

impl<'a> Session<'a> {
    fn start(instance: &'a ProcurementInstance, config: &RunConfig) -> Result<Self> {
        let started = Instant::now();
        let deadline = config.time_limit.map(|s| started + Duration::from_secs_f64(s));
        Ok(Session {
            evaluator: Evaluator::new(instance, config.space, config.tabu.clone(), config.seed, config.threads, deadline)?,
            archive: ParetoArchive::new(),
            generations: 0,
            started,
            max_evaluations: config.max_evaluations,
        })
    }

    fn remaining(&self) -> usize {
        self.max_evaluations
            .map_or(usize::MAX, |m| m.saturating_sub(self.evaluator.evaluations) as usize)
    }

    fn finished(&self) -> bool {
        self.remaining() == 0 || self.evaluator.expired()
    }

    fn offer(&mut self, genome: &[f64], eval: &Evaluated) {
        if eval.violation <= 0.0 && self.archive.accepts(eval.plan_objectives) {
            self.archive.insert(eval.entry(genome));
        }
    }

    fn finish(mut self) -> RunOutcome {
        self.archive.sort();
        RunOutcome {
            archive: self.archive,
            evaluations: self.evaluator.evaluations,
            generations: self.generations,
            elapsed: self.started.elapsed(),
        }
    }
}
