//! Deterministic case-arrival schedules.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::instance::{ProcurementInstance, CEIL_TOLERANCE};

/// Who a scheduled case belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseSource {
    /// Disease id, 1-based.
    Disease(u32),
    /// A suspected case with no disease case to carry it.
    Epidemic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrivalEvent {
    pub time_hours: f64,
    pub source: CaseSource,
    /// 1-based arrival number within the source.
    pub ordinal: u64,
    pub suspected: bool,
    /// Exact time as `hours_per_day * ordinal / cases` (the cycle length
    /// cancels when comparing).
    clock: (u64, u64),
}

impl ArrivalEvent {
    fn cmp_key(&self, other: &Self) -> Ordering {
        let lhs = self.clock.0 as u128 * other.clock.1 as u128;
        let rhs = other.clock.0 as u128 * self.clock.1 as u128;
        lhs.cmp(&rhs)
            .then(self.source.cmp(&other.source))
            .then(self.ordinal.cmp(&other.ordinal))
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ArrivalSchedule {
    pub events: Vec<ArrivalEvent>,
}

impl ArrivalSchedule {
    pub fn suspected_count(&self) -> usize {
        self.events.iter().filter(|e| e.suspected).count()
    }
}

/// Whether arrival `ordinal` of a disease with suspect rate `rate` carries
/// a suspected case: the running total `ordinal * rate` crosses an integer.
fn crosses(ordinal: u64, rate: f64) -> bool {
    let now = (ordinal as f64 * rate + CEIL_TOLERANCE).floor();
    let before = ((ordinal - 1) as f64 * rate + CEIL_TOLERANCE).floor();
    now > before
}

/// Builds the arrival schedule for the given per-disease case counts.
///
/// Disease `i` sees its cases at `T * h_w * c / counts[i]` hours for
/// `c = 1..=counts[i]`. With `include_suspected`, the schedule carries
/// exactly `r_0` suspected cases: each disease flags arrivals where its
/// running suspect total crosses an integer, the shortfall to `r_0` is
/// flagged by largest fractional remainder, and whatever cannot ride on a
/// disease case becomes a standalone epidemic case at the end of the cycle.
pub fn build_schedule(
    instance: &ProcurementInstance,
    counts: &[u64],
    include_suspected: bool,
) -> Result<ArrivalSchedule> {
    if counts.len() != instance.diseases.len() {
        return Err(Error::Structural(format!(
            "{} case counts for {} diseases",
            counts.len(),
            instance.diseases.len()
        )));
    }
    let cycle = instance.cycle_days as f64;
    let mut per_disease: Vec<Vec<ArrivalEvent>> = instance
        .diseases
        .iter()
        .zip(counts)
        .map(|(d, &r)| {
            let hours = d.working_hours();
            let rate = d.suspect_rate();
            (1..=r)
                .map(|c| ArrivalEvent {
                    time_hours: cycle * (hours * c) as f64 / r as f64,
                    source: CaseSource::Disease(d.id),
                    ordinal: c,
                    suspected: include_suspected && crosses(c, rate),
                    clock: (hours * c, r),
                })
                .collect()
        })
        .collect();

    let mut standalone = 0u64;
    if include_suspected {
        let target = instance.epidemic.suspected_cases;
        let flagged: u64 = per_disease
            .iter()
            .map(|events| events.iter().filter(|e| e.suspected).count() as u64)
            .sum();
        if flagged < target {
            standalone = top_up(instance, counts, &mut per_disease, target - flagged);
        }
    }

    let mut events: Vec<ArrivalEvent> = per_disease.into_iter().flatten().collect();
    events.extend((1..=standalone).map(|c| ArrivalEvent {
        time_hours: cycle * 24.0,
        source: CaseSource::Epidemic,
        ordinal: c,
        suspected: true,
        clock: (24, 1),
    }));
    events.sort_by(ArrivalEvent::cmp_key);

    if include_suspected {
        let target = instance.epidemic.suspected_cases as usize;
        let mut excess = events.iter().filter(|e| e.suspected).count().saturating_sub(target);
        for event in events.iter_mut().rev() {
            if excess == 0 {
                break;
            }
            if event.suspected {
                event.suspected = false;
                excess -= 1;
            }
        }
    }
    Ok(ArrivalSchedule { events })
}

/// Flags up to `deficit` more disease arrivals, one per disease per round
/// in order of fractional remainder, and returns the part left over.
fn top_up(
    instance: &ProcurementInstance,
    counts: &[u64],
    per_disease: &mut [Vec<ArrivalEvent>],
    mut deficit: u64,
) -> u64 {
    let mut order: Vec<(usize, f64)> = instance
        .diseases
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (d, &r))| {
            let expected = r as f64 * d.suspect_rate();
            let frac = (expected - (expected + CEIL_TOLERANCE).floor()).max(0.0);
            (i, frac)
        })
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    while deficit > 0 {
        let mut progressed = false;
        for &(i, _) in &order {
            if deficit == 0 {
                break;
            }
            if let Some(event) = per_disease[i].iter_mut().rev().find(|e| !e.suspected) {
                event.suspected = true;
                deficit -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    deficit
}
