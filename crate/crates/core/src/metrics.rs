//! Front quality indicators and the search-space complexity comparison.

use serde::{Deserialize, Serialize};

use crate::bounds::{BudgetBounds, VariableBounds};
use crate::error::{Error, Result};
use crate::instance::ProcurementInstance;

/// `(epidemic effect, treatment effect)`, both maximized.
pub type Point = (f64, f64);

/// Pareto dominance under maximization.
pub fn dominates(a: Point, b: Point) -> bool {
    a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
}

/// Area dominated by `front` and bounded below by `reference`.
pub fn hyperarea(front: &[Point], reference: Point) -> Result<f64> {
    for (i, &(x, y)) in front.iter().enumerate() {
        if !(x >= reference.0 && y >= reference.1) {
            return Err(Error::validation(
                format!("front[{i}]"),
                format!("point ({x}, {y}) does not dominate the reference ({}, {})", reference.0, reference.1),
            ));
        }
    }
    let mut sorted = front.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut area = 0.0;
    let mut height = reference.1;
    for (x, y) in sorted {
        if y > height {
            area += (x - reference.0) * (y - height);
            height = y;
        }
    }
    Ok(area)
}

/// Fraction of `covered` dominated by at least one point of `by`.
pub fn coverage(covered: &[Point], by: &[Point]) -> Result<f64> {
    if covered.is_empty() {
        return Err(Error::validation("coverage", "the covered set is empty"));
    }
    let hit = covered.iter().filter(|&&a| by.iter().any(|&b| dominates(b, a))).count();
    Ok(hit as f64 / covered.len() as f64)
}

/// Search-space sizes of the original and transformed problems as base-10
/// logarithms, with the ratio of the two in exact and averaged form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub supplies: usize,
    pub diseases: usize,
    /// Total cases `r` over all profiles, suspected cases included.
    pub total_cases: u64,
    pub log_original_size: f64,
    pub log_original_work: f64,
    pub log_transformed_size: f64,
    /// Per profile, epidemic first.
    pub log_subproblem_sizes: Vec<f64>,
    pub log_subproblem_work: Vec<f64>,
    pub avg_supply_range: f64,
    pub avg_budget_range: f64,
    pub avg_count_range: f64,
    pub avg_alternatives: f64,
    pub exact_ratio: f64,
    pub averaged_ratio: f64,
}

fn log10_width(width: f64) -> f64 {
    if width > 0.0 {
        width.log10()
    } else {
        0.0
    }
}

/// `log10(sum 10^v)` without overflow.
fn log10_sum(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    top + values.iter().map(|v| 10f64.powf(v - top)).sum::<f64>().log10()
}

/// The averaged ratio
/// `(N log x + log(r a)) / (m log y + a log z + log(r a))`, with `N`
/// supplies, `m` diseases and `a` the average alternative count. Averages
/// below 1 are raised to 1.
pub fn averaged_ratio(
    supplies: usize,
    diseases: usize,
    avg_supply_range: f64,
    avg_budget_range: f64,
    avg_count_range: f64,
    avg_alternatives: f64,
    total_cases: u64,
) -> f64 {
    let shared = (total_cases as f64 * avg_alternatives).max(1.0).log10();
    let top = supplies as f64 * avg_supply_range.max(1.0).log10() + shared;
    let bottom = diseases as f64 * avg_budget_range.max(1.0).log10()
        + avg_alternatives * avg_count_range.max(1.0).log10()
        + shared;
    top / bottom
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Sizes each variable range as `upper - lower`; zero-width ranges count
/// as a factor of one. Counts and work estimates use expected cases (the
/// suspected-case count for the epidemic profile).
pub fn complexity_report(
    instance: &ProcurementInstance,
    x_bounds: &VariableBounds,
    budget_bounds: &BudgetBounds,
) -> ComplexityReport {
    let supply_widths: Vec<f64> = x_bounds
        .x_lower
        .iter()
        .zip(&x_bounds.x_upper)
        .map(|(&lo, &hi)| (hi - lo) as f64)
        .collect();
    let budget_widths: Vec<f64> = budget_bounds
        .y_lower
        .iter()
        .zip(&budget_bounds.y_upper)
        .map(|(&lo, &hi)| (hi - lo).get() as f64)
        .collect();

    let mut log_subproblem_sizes = Vec::new();
    let mut log_subproblem_work = Vec::new();
    let mut count_widths = Vec::new();
    let mut alternative_totals = Vec::new();
    let mut total_cases = 0;
    let mut work = 0.0;
    for profile in instance.profiles() {
        let cases = instance.expected_cases(profile.index);
        total_cases += cases;
        let alternatives: usize = profile.items.iter().map(|i| i.alternatives.len()).sum();
        alternative_totals.push(alternatives as f64);
        let components: usize = profile.alternative_items().iter().map(|&j| profile.items[j].alternatives.len()).sum();
        count_widths.extend(std::iter::repeat_n(cases as f64, components));
        log_subproblem_sizes.push(components as f64 * log10_width(cases as f64));
        let profile_work = (cases * alternatives as u64) as f64;
        work += profile_work;
        log_subproblem_work.push(log10_width(profile_work));
    }

    let log_original_size: f64 = supply_widths.iter().map(|&w| log10_width(w)).sum();
    let log_original_work = log10_width(work);
    let log_transformed_size: f64 = budget_widths.iter().map(|&w| log10_width(w)).sum();
    let log_divided = log10_sum(
        log_subproblem_sizes
            .iter()
            .zip(&log_subproblem_work)
            .zip(instance.profiles())
            .filter(|(_, p)| instance.expected_cases(p.index) > 0)
            .map(|((n, w), _)| n + w),
    );
    let exact_ratio = (log_original_size + log_original_work) / (log_transformed_size + log_divided);

    let avg_supply_range = mean(supply_widths.iter().copied());
    let avg_budget_range = mean(budget_widths.iter().copied());
    let avg_count_range = mean(count_widths.iter().copied());
    let avg_alternatives = mean(alternative_totals.iter().copied());
    ComplexityReport {
        supplies: instance.supplies.len(),
        diseases: instance.diseases.len(),
        total_cases,
        log_original_size,
        log_original_work,
        log_transformed_size,
        log_subproblem_sizes,
        log_subproblem_work,
        avg_supply_range,
        avg_budget_range,
        avg_count_range,
        avg_alternatives,
        exact_ratio,
        averaged_ratio: averaged_ratio(
            instance.supplies.len(),
            instance.diseases.len(),
            avg_supply_range,
            avg_budget_range,
            avg_count_range,
            avg_alternatives,
            total_cases,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{x_bounds, y_bounds};
    use crate::instance::tiny;
    use crate::simulation::divide;
    use proptest::prelude::*;

    #[test]
    fn two_point_staircase() {
        assert_eq!(hyperarea(&[(2.0, 4.0), (4.0, 2.0)], (0.0, 0.0)).unwrap(), 12.0);
    }

    #[test]
    fn singleton_and_dominated_points() {
        assert_eq!(hyperarea(&[(1.5, 3.0)], (0.0, 0.0)).unwrap(), 4.5);
        assert_eq!(hyperarea(&[(2.0, 4.0), (4.0, 2.0), (1.0, 1.0)], (0.0, 0.0)).unwrap(), 12.0);
        assert_eq!(hyperarea(&[(2.0, 4.0), (2.0, 4.0)], (0.0, 0.0)).unwrap(), 8.0);
        assert_eq!(hyperarea(&[], (0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn point_below_reference_is_named() {
        let err = hyperarea(&[(1.0, 1.0), (-1.0, 2.0)], (0.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("front[1]"), "{err}");
        assert!(hyperarea(&[(f64::NAN, 1.0)], (0.0, 0.0)).is_err());
    }

    #[test]
    fn coverage_cases() {
        assert_eq!(coverage(&[(1.0, 1.0)], &[(2.0, 2.0)]).unwrap(), 1.0);
        let front = [(1.0, 3.0), (3.0, 1.0)];
        assert_eq!(coverage(&front, &front).unwrap(), 0.0);
        assert_eq!(coverage(&front, &[(2.0, 2.0)]).unwrap(), 0.0);
        assert_eq!(coverage(&front, &[(3.0, 3.0), (0.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(coverage(&front, &[(1.0, 3.5)]).unwrap(), 0.5);
        assert!(coverage(&[], &front).is_err());
    }

    #[test]
    fn hospital_scale_averages_give_about_79() {
        let ratio = averaged_ratio(25_000, 450, 1100.0, 95.0, 66.0, 37.0, 100_000);
        assert!((ratio - 79.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn identical_spaces_give_ratio_near_one() {
        let ratio = averaged_ratio(40, 40, 50.0, 50.0, 1.0, 3.0, 100);
        assert!((ratio - 1.0).abs() < 1e-12, "{ratio}");
    }

    #[test]
    fn tiny_exact_form_matches_direct_products() {
        let t = tiny();
        let xb = x_bounds(&t);
        let yb = y_bounds(&t, &divide(&t));
        let report = complexity_report(&t, &xb, &yb);
        // x widths 0,1,1,0,4,4; y widths 8,16.
        assert!((report.log_original_size - 16f64.log10()).abs() < 1e-12);
        assert!((report.log_transformed_size - 128f64.log10()).abs() < 1e-12);
        // Work: 1 suspected case x 3 alternatives + 4 cases x 3.
        assert!((report.log_original_work - 15f64.log10()).abs() < 1e-12);
        // N_0 = 1 * 1, N_1 = 4 * 4; O(f_0) = 3, O(f_1) = 12.
        let divided: f64 = 1.0 * 3.0 + 16.0 * 12.0;
        let expected = (16.0 * 15.0f64).log10() / (128.0 * divided).log10();
        assert!((report.exact_ratio - expected).abs() < 1e-12, "{}", report.exact_ratio);
        assert!(report.averaged_ratio > 0.0 && report.averaged_ratio.is_finite());
        assert_eq!(report.total_cases, 5);
    }

    #[test]
    fn log10_sum_is_stable() {
        let v = log10_sum([400.0, 400.0].into_iter());
        assert!((v - (400.0 + 2f64.log10())).abs() < 1e-9);
        assert_eq!(log10_sum(std::iter::empty()), 0.0);
    }

    fn front() -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 0..12)
    }

    proptest! {
        #[test]
        fn adding_points_never_shrinks_the_area(points in front(), extra in (0.0..10.0f64, 0.0..10.0f64)) {
            let before = hyperarea(&points, (0.0, 0.0)).unwrap();
            let mut more = points.clone();
            more.push(extra);
            let after = hyperarea(&more, (0.0, 0.0)).unwrap();
            prop_assert!(after >= before - 1e-12);
            if points.iter().all(|&p| dominates(extra, p)) && !points.is_empty() {
                prop_assert!(after > before);
            }
        }

        #[test]
        fn area_ignores_order(mut points in front()) {
            let a = hyperarea(&points, (0.0, 0.0)).unwrap();
            points.reverse();
            prop_assert_eq!(a, hyperarea(&points, (0.0, 0.0)).unwrap());
        }
    }
}
