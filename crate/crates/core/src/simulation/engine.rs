//! Case-by-case treatment simulation over a purchase plan.

use std::io::{self, Write};

use super::schedule::{build_schedule, ArrivalEvent, CaseSource};
use crate::error::{Error, Result};
use crate::instance::{CompiledEffect, ProcurementInstance, ProfileRef, SupplyId, TreatmentItem};
use crate::money::Cents;
use crate::plan::PurchasePlan;

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationResult {
    /// Summed epidemic-control effect over treated suspected cases.
    pub epidemic_effect: f64,
    /// `sum_i w_i * per_disease_effects[i]`, in disease order.
    pub treatment_effect: f64,
    pub per_disease_effects: Vec<f64>,
    pub epidemic_treatable: bool,
    pub disease_treatable: Vec<bool>,
    pub untreated_epidemic: u64,
    pub untreated_diseases: Vec<u64>,
    pub cost_spent: Cents,
}

/// One treatment attempt, for debugging output.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub time_hours: f64,
    pub profile: usize,
    pub ordinal: u64,
    pub suspected: bool,
    /// Supplies used for the alternative items, in item order.
    pub chosen: Vec<SupplyId>,
    /// `None` when the case went untreated.
    pub effect: Option<f64>,
}

/// Full output of one simulation, including the stock ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRun {
    pub result: EvaluationResult,
    pub consumed: Vec<u64>,
    pub remaining: Vec<u64>,
    pub trace: Vec<TraceRecord>,
}

struct ProfileState<'a> {
    mandatory: Vec<(usize, u64)>,
    alternatives: Vec<&'a TreatmentItem>,
    cursors: Vec<usize>,
    effect_fn: CompiledEffect,
    scratch: Vec<f64>,
    treatable: bool,
    effect: f64,
    untreated: u64,
}

impl<'a> ProfileState<'a> {
    fn new(profile: ProfileRef<'a>) -> Self {
        let mandatory = profile
            .items
            .iter()
            .filter(|i| i.mandatory)
            .map(|i| (i.alternatives[0].supply.index(), i.alternatives[0].quantity as u64))
            .collect();
        let alternatives: Vec<&TreatmentItem> = profile.items.iter().filter(|i| !i.mandatory).collect();
        ProfileState {
            mandatory,
            cursors: vec![0; alternatives.len()],
            scratch: vec![0.0; alternatives.len()],
            alternatives,
            effect_fn: profile.compiled_effect(),
            treatable: true,
            effect: 0.0,
            untreated: 0,
        }
    }

    /// Treats one case against `stock`. Returns the case effect, or `None`
    /// if the case went untreated (any partial consumption is undone).
    fn treat(&mut self, stock: &mut [u64], chosen: &mut Vec<SupplyId>) -> Option<f64> {
        chosen.clear();
        if !self.treatable {
            self.untreated += 1;
            return None;
        }
        let mut taken: Vec<(usize, u64)> = Vec::with_capacity(self.mandatory.len() + self.alternatives.len());
        let mut exhausted = false;
        for &(k, q) in &self.mandatory {
            if stock[k] < q {
                return self.abandon(stock, &taken);
            }
            stock[k] -= q;
            taken.push((k, q));
            if stock[k] < q {
                exhausted = true;
            }
        }
        for (slot, item) in self.alternatives.iter().enumerate() {
            let cursor = &mut self.cursors[slot];
            while *cursor < item.alternatives.len() {
                let alt = &item.alternatives[*cursor];
                if stock[alt.supply.index()] >= alt.quantity as u64 {
                    break;
                }
                *cursor += 1;
            }
            let Some(alt) = item.alternatives.get(*cursor) else {
                return self.abandon(stock, &taken);
            };
            let k = alt.supply.index();
            stock[k] -= alt.quantity as u64;
            taken.push((k, alt.quantity as u64));
            self.scratch[slot] = alt.effect;
            chosen.push(alt.supply);
        }
        let value = self.effect_fn.eval(&self.scratch);
        self.effect += value;
        if exhausted {
            self.treatable = false;
        }
        Some(value)
    }

    /// Buys whatever the next case lacks: each short mandatory supply, and
    /// for an alternative item with nothing left in stock, the cheapest
    /// alternative still on the working list.
    fn provision(&mut self, stock: &mut [u64], extra: &mut [u64], instance: &ProcurementInstance) {
        self.treatable = true;
        for &(k, q) in &self.mandatory {
            if stock[k] < q {
                extra[k] += q - stock[k];
                stock[k] = q;
            }
        }
        for (slot, item) in self.alternatives.iter().enumerate() {
            let remaining = &item.alternatives[self.cursors[slot]..];
            if remaining.iter().any(|a| stock[a.supply.index()] >= a.quantity as u64) {
                continue;
            }
            let Some(alt) = remaining
                .iter()
                .min_by_key(|a| (instance.supply(a.supply).unit_price.get() * i64::from(a.quantity), a.supply))
            else {
                continue;
            };
            let (k, q) = (alt.supply.index(), alt.quantity as u64);
            extra[k] += q - stock[k];
            stock[k] = q;
        }
    }

    fn abandon(&mut self, stock: &mut [u64], taken: &[(usize, u64)]) -> Option<f64> {
        for &(k, q) in taken {
            stock[k] += q;
        }
        self.treatable = false;
        self.untreated += 1;
        None
    }
}

/// Simulates treatment of every scheduled case with the plan added to
/// inventory. `counts` gives the per-disease case counts; suspected cases
/// always total `r_0`.
pub fn simulate(
    instance: &ProcurementInstance,
    plan: &PurchasePlan,
    counts: &[u64],
    record_trace: bool,
) -> Result<SimulationRun> {
    if plan.len() != instance.supplies.len() {
        return Err(Error::Structural(format!(
            "plan has {} quantities for {} supplies",
            plan.len(),
            instance.supplies.len()
        )));
    }
    let schedule = build_schedule(instance, counts, true)?;
    let initial: Vec<u64> = instance
        .supplies
        .iter()
        .zip(&plan.0)
        .map(|(s, &x)| s.inventory + x)
        .collect();
    let mut stock = initial.clone();
    let mut states: Vec<ProfileState> = instance.profiles().map(ProfileState::new).collect();
    let mut trace = Vec::new();
    let mut chosen = Vec::new();

    let mut run_block = |profile: usize, event: &ArrivalEvent, stock: &mut Vec<u64>| {
        let effect = states[profile].treat(stock, &mut chosen);
        if record_trace {
            trace.push(TraceRecord {
                time_hours: event.time_hours,
                profile,
                ordinal: event.ordinal,
                suspected: event.suspected,
                chosen: chosen.clone(),
                effect,
            });
        }
    };
    for event in &schedule.events {
        if let CaseSource::Disease(id) = event.source {
            run_block(id as usize, event, &mut stock);
        }
        if event.suspected {
            run_block(0, event, &mut stock);
        }
    }

    let per_disease_effects: Vec<f64> = states[1..].iter().map(|s| s.effect).collect();
    let treatment_effect = instance
        .diseases
        .iter()
        .zip(&per_disease_effects)
        .fold(0.0, |acc, (d, &e)| acc + d.weight * e);
    let result = EvaluationResult {
        epidemic_effect: states[0].effect,
        treatment_effect,
        per_disease_effects,
        epidemic_treatable: states[0].treatable,
        disease_treatable: states[1..].iter().map(|s| s.treatable).collect(),
        untreated_epidemic: states[0].untreated,
        untreated_diseases: states[1..].iter().map(|s| s.untreated).collect(),
        cost_spent: plan.cost(instance),
    };
    let consumed = initial.iter().zip(&stock).map(|(a, b)| a - b).collect();
    Ok(SimulationRun {
        result,
        consumed,
        remaining: stock,
        trace,
    })
}

/// Units the plan lacks for the lower case counts and `r_0` suspected
/// cases, found by replaying the schedule and buying at each shortage.
fn shortfall(instance: &ProcurementInstance, plan: &PurchasePlan, counts: &[u64]) -> Result<Vec<u64>> {
    let schedule = build_schedule(instance, counts, true)?;
    let mut stock: Vec<u64> = instance
        .supplies
        .iter()
        .zip(&plan.0)
        .map(|(s, &x)| s.inventory + x)
        .collect();
    let mut extra = vec![0; stock.len()];
    let mut states: Vec<ProfileState> = instance.profiles().map(ProfileState::new).collect();
    let mut chosen = Vec::new();
    let mut run_block = |profile: usize, stock: &mut [u64]| {
        states[profile].provision(stock, &mut extra, instance);
        states[profile].treat(stock, &mut chosen);
    };
    for event in &schedule.events {
        if let CaseSource::Disease(id) = event.source {
            run_block(id as usize, &mut stock);
        }
        if event.suspected {
            run_block(0, &mut stock);
        }
    }
    Ok(extra)
}

/// Adds purchases until every lower-bound and suspected case is treated
/// under simulation, for at most `max_rounds` rounds. Extra stock changes
/// which alternatives earlier cases pick, so one round may not suffice.
pub fn top_up(instance: &ProcurementInstance, plan: &PurchasePlan, max_rounds: usize) -> Result<PurchasePlan> {
    let counts: Vec<u64> = instance.diseases.iter().map(|d| d.lower_cases).collect();
    let mut plan = plan.clone();
    for _ in 0..max_rounds {
        let extra = shortfall(instance, &plan, &counts)?;
        if extra.iter().all(|&x| x == 0) {
            break;
        }
        for (x, e) in plan.0.iter_mut().zip(extra) {
            *x += e;
        }
    }
    Ok(plan)
}

/// Evaluates a plan on the expected case counts.
pub fn evaluate_original(instance: &ProcurementInstance, plan: &PurchasePlan) -> Result<EvaluationResult> {
    let counts: Vec<u64> = instance.diseases.iter().map(|d| d.expected_cases).collect();
    Ok(simulate(instance, plan, &counts, false)?.result)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub budget_excess: Cents,
    /// Untreated cases per disease when simulating the lower case counts.
    pub untreated_lower_cases: Vec<u64>,
    pub untreated_suspected: u64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.budget_excess == Cents::ZERO && self.violated_flags() == 0
    }

    /// Profiles that left a required case untreated.
    pub fn violated_flags(&self) -> usize {
        self.untreated_lower_cases.iter().filter(|&&u| u > 0).count() + usize::from(self.untreated_suspected > 0)
    }

    /// Budget excess plus the budget for every violated profile.
    pub fn violation(&self, budget: Cents) -> f64 {
        self.budget_excess.get() as f64 + budget.get() as f64 * self.violated_flags() as f64
    }
}

/// Checks the budget and simulates the lower case counts plus `r_0`
/// suspected cases.
pub fn check_feasibility(instance: &ProcurementInstance, plan: &PurchasePlan) -> Result<FeasibilityReport> {
    let counts: Vec<u64> = instance.diseases.iter().map(|d| d.lower_cases).collect();
    let run = simulate(instance, plan, &counts, false)?;
    Ok(FeasibilityReport {
        budget_excess: (run.result.cost_spent - instance.budget).positive_part(),
        untreated_lower_cases: run.result.untreated_diseases,
        untreated_suspected: run.result.untreated_epidemic,
    })
}

/// Writes trace records as tab-separated lines with a header.
pub fn write_trace_tsv(instance: &ProcurementInstance, records: &[TraceRecord], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "time_hours\tprofile\tcase\tsuspected\tsupplies\teffect")?;
    for r in records {
        let supplies = if r.chosen.is_empty() {
            "-".to_owned()
        } else {
            r.chosen.iter().map(|s| instance.supply(*s).name.as_str()).collect::<Vec<_>>().join(",")
        };
        let effect = r.effect.map_or_else(|| "untreated".to_owned(), |e| e.to_string());
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.time_hours,
            instance.profile(r.profile).label(),
            r.ordinal,
            r.suspected,
            supplies,
            effect
        )?;
    }
    Ok(())
}
