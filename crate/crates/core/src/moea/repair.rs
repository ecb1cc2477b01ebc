//! Mapping arbitrary budget vectors onto the feasible allocation set.

use crate::bounds::BudgetBounds;
use crate::error::{Error, Result};
use crate::money::Cents;
use crate::plan::BudgetAllocation;

/// Clamps every entry of `raw` (cents) into its bounds and rounds down; if
/// the total then exceeds the remaining budget, every entry's slack above
/// its lower bound shrinks by the same factor so the total lands exactly on
/// the budget, with rounding leftovers handed out by largest remainder.
pub fn repair_allocation(raw: &[f64], bounds: &BudgetBounds) -> Result<BudgetAllocation> {
    if raw.len() != bounds.len() {
        return Err(Error::Structural(format!(
            "allocation has {} entries for {} profiles",
            raw.len(),
            bounds.len()
        )));
    }
    bounds.ensure_feasible()?;
    let clamped: Vec<i64> = raw
        .iter()
        .zip(bounds.y_lower.iter().zip(&bounds.y_upper))
        .map(|(&v, (lo, hi))| {
            let v = if v.is_nan() { lo.get() as f64 } else { v.floor() };
            (v.max(lo.get() as f64).min(hi.get() as f64)) as i64
        })
        .collect();
    let total: i64 = clamped.iter().sum();
    let limit = bounds.remaining_budget.get();
    if total <= limit {
        return Ok(BudgetAllocation::from_cents(&clamped));
    }

    let slack: Vec<i128> = clamped.iter().zip(&bounds.y_lower).map(|(&v, lo)| (v - lo.get()) as i128).collect();
    let slack_total: i128 = slack.iter().sum();
    let available = (limit - bounds.y_lower.iter().sum::<Cents>().get()) as i128;
    let mut shares: Vec<i128> = slack.iter().map(|&s| s * available / slack_total).collect();
    let mut order: Vec<usize> = (0..slack.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(slack[i] * available % slack_total), i));
    let short = available - shares.iter().sum::<i128>();
    for &i in order.iter().take(short as usize) {
        shares[i] += 1;
    }
    let repaired: Vec<i64> = bounds.y_lower.iter().zip(&shares).map(|(lo, &s)| lo.get() + s as i64).collect();
    Ok(BudgetAllocation::from_cents(&repaired))
}
