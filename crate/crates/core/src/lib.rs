//! Budget-constrained procurement of medical supplies as a two-objective
//! problem: maximize the epidemic-control effect and the weighted
//! treatment effect of a purchase plan, subject to a budget and to being
//! able to treat a minimum number of cases.
//!
//! The crate offers two ways to search. The original formulation evolves
//! per-supply purchase quantities directly and scores them by simulating
//! case arrivals. The transformed formulation evolves a budget split over
//! the epidemic profile and each disease; every split is scored by solving
//! one small subproblem per profile with greedy upgrades and tabu search.
//!
//! ```
//! use procure::instance::tiny;
//! use procure::plan::BudgetAllocation;
//! use procure::subproblem::{TabuConfig, TransformedProblem};
//!
//! let instance = tiny();
//! let problem = TransformedProblem::new(&instance);
//! let y = BudgetAllocation::from_cents(&[10, 20]);
//! let eval = problem.evaluate(&y, &TabuConfig::default()).unwrap();
//! assert_eq!((eval.epidemic_effect, eval.treatment_effect), (1.0, 4.0));
//! ```

pub mod bounds;
pub mod error;
pub mod instance;
pub mod instancegen;
pub mod metrics;
pub mod moea;
pub mod money;
pub mod plan;
pub mod rng;
pub mod simulation;
pub mod subproblem;

pub use error::{Error, Result};
pub use instance::ProcurementInstance;
pub use money::Cents;
pub use plan::{BudgetAllocation, PurchasePlan};
