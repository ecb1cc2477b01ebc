//! Case-arrival simulation: plan evaluation, feasibility checks, and the
//! storage division that seeds the transformed problem.

mod division;
mod engine;
mod schedule;

pub use division::{divide, DivisionOutcome};
pub(crate) use division::mandatory_demand;
pub use engine::{
    check_feasibility, evaluate_original, simulate, write_trace_tsv, EvaluationResult, FeasibilityReport,
    SimulationRun, TraceRecord,
    top_up,
};
pub use schedule::{build_schedule, ArrivalEvent, ArrivalSchedule, CaseSource};
