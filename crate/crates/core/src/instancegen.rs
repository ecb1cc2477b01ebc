//! Seeded synthetic instances and subproblems.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::bounds::{x_bounds, y_bounds};
use crate::error::{Error, Result};
use crate::instance::{
    Alternative, DiseaseProfile, EffectFunction, ProcurementInstance, Supply, SupplyId, TreatmentItem, WeightedItem,
};
use crate::money::Cents;
use crate::simulation::divide;
use crate::subproblem::{oracle_size, SpecAlternative, SpecItem, SubproblemSpec};

/// Alternatives per epidemic-control item, in item order.
const EPIDEMIC_SHAPE: [usize; 6] = [3, 3, 2, 3, 4, 3];
const EPIDEMIC_MANDATORY: usize = 2;
/// Probability that two adjacent effects swap their price order.
const PRICE_INVERSION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub diseases: usize,
    /// Total supply count.
    pub supplies: usize,
    /// Total expected disease cases.
    pub cases: u64,
    pub avg_items: f64,
    pub avg_alternatives: f64,
    /// Inclusive unit-price range in cents.
    pub price_range: (i64, i64),
    /// Effect range for alternatives below the best one.
    pub effect_range: (f64, f64),
    pub suspect_prob_range: (f64, f64),
    /// Fraction of supplies that start with some stock.
    pub inventory_fill: f64,
    /// Probability that a disease reuses a treatment item or mandatory
    /// supply that another disease uses.
    pub overlap: f64,
    /// Share of supplies reserved for epidemic control (at least 20).
    pub epidemic_share: f64,
    /// Budget over the cheapest feasible spend.
    pub beta: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            diseases: 20,
            supplies: 300,
            cases: 2000,
            avg_items: 6.0,
            avg_alternatives: 5.0,
            price_range: (50, 20_000),
            effect_range: (0.3, 0.95),
            suspect_prob_range: (0.0, 0.05),
            inventory_fill: 0.1,
            overlap: 0.3,
            epidemic_share: 0.02,
            beta: 1.3,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn epidemic_supplies(&self) -> usize {
        let base: usize = EPIDEMIC_MANDATORY + EPIDEMIC_SHAPE.iter().sum::<usize>();
        base.max((self.epidemic_share * self.supplies as f64).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, msg: &str| Err(Error::validation(field, msg));
        if self.diseases == 0 {
            return fail("diseases", "must be positive");
        }
        if self.supplies < self.epidemic_supplies() + 2 {
            return fail(
                "supplies",
                &format!("need at least {} supplies", self.epidemic_supplies() + 2),
            );
        }
        if self.cases == 0 {
            return fail("cases", "must be positive");
        }
        if self.avg_items.is_nan() || self.avg_items < 1.0 {
            return fail("avg_items", "must be at least 1");
        }
        if self.avg_alternatives.is_nan() || self.avg_alternatives < 1.0 {
            return fail("avg_alternatives", "must be at least 1");
        }
        if !(0 < self.price_range.0 && self.price_range.0 <= self.price_range.1) {
            return fail("price_range", "need 0 < low <= high");
        }
        let (lo, hi) = self.effect_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return fail("effect_range", "need 0 <= low <= high <= 1");
        }
        let (lo, hi) = self.suspect_prob_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return fail("suspect_prob_range", "need 0 <= low <= high <= 1");
        }
        for (field, v) in [
            ("inventory_fill", self.inventory_fill),
            ("overlap", self.overlap),
            ("epidemic_share", self.epidemic_share),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(field, "must lie in [0, 1]");
            }
        }
        if !self.beta.is_finite() || self.beta < 1.0 {
            return fail("beta", "must be at least 1");
        }
        Ok(())
    }
}

/// Draws effects for `n` alternatives: the best is 1, the rest descend
/// within `range`.
fn draw_effects(rng: &mut ChaCha8Rng, n: usize, range: (f64, f64)) -> Vec<f64> {
    let mut effects: Vec<f64> = (1..n).map(|_| rng.random_range(range.0..=range.1)).collect();
    effects.sort_by(|a, b| b.total_cmp(a));
    effects.insert(0, 1.0);
    effects
}

/// Pairs effects with supplies so that pricier supplies get the better
/// effects, except for occasional adjacent swaps.
fn build_item(rng: &mut ChaCha8Rng, supplies: &[SupplyId], prices: &[i64], effect_range: (f64, f64)) -> TreatmentItem {
    let mut by_price = supplies.to_vec();
    by_price.sort_by_key(|s| (std::cmp::Reverse(prices[s.index()]), *s));
    for i in 1..by_price.len() {
        if rng.random_bool(PRICE_INVERSION) {
            by_price.swap(i - 1, i);
        }
    }
    let effects = draw_effects(rng, by_price.len(), effect_range);
    TreatmentItem::alternatives(
        by_price
            .into_iter()
            .zip(effects)
            .map(|(supply, effect)| Alternative {
                supply,
                quantity: rng.random_range(1..=3),
                effect,
            })
            .collect(),
    )
}

/// Random groups of one or two items with normalized weights.
fn random_effect_fn(rng: &mut ChaCha8Rng, items: &[usize]) -> EffectFunction {
    let mut order = items.to_vec();
    order.shuffle(rng);
    let mut groups = Vec::new();
    let mut rest = order.as_slice();
    while !rest.is_empty() {
        let size = if rest.len() >= 2 && rng.random_bool(0.5) { 2 } else { 1 };
        let (group, tail) = rest.split_at(size);
        rest = tail;
        let raw: Vec<f64> = group.iter().map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        groups.push(
            group
                .iter()
                .zip(raw)
                .map(|(&item, w)| WeightedItem { item, weight: w / total })
                .collect(),
        );
    }
    EffectFunction::new(groups)
}

fn epidemic_profile(rng: &mut ChaCha8Rng, spec: &GenSpec, prices: &[i64]) -> (Vec<TreatmentItem>, EffectFunction) {
    let mut items: Vec<TreatmentItem> =
        (0..EPIDEMIC_MANDATORY).map(|k| TreatmentItem::mandatory(SupplyId::from_index(k), 1)).collect();
    let mut pools: Vec<Vec<SupplyId>> = Vec::new();
    let mut next = EPIDEMIC_MANDATORY;
    for &n in &EPIDEMIC_SHAPE {
        pools.push((next..next + n).map(SupplyId::from_index).collect());
        next += n;
    }
    for (i, k) in (next..spec.epidemic_supplies()).enumerate() {
        pools[i % EPIDEMIC_SHAPE.len()].push(SupplyId::from_index(k));
    }
    items.extend(pools.iter().map(|pool| build_item(rng, pool, prices, spec.effect_range)));
    let m = EPIDEMIC_MANDATORY;
    let effect = EffectFunction::from_pairs(&[
        &[(m, 0.4), (m + 1, 0.6)],
        &[(m + 2, 1.0)],
        &[(m + 3, 0.2), (m + 4, 0.8)],
        &[(m + 5, 1.0)],
    ]);
    (items, effect)
}

/// Treatment items and mandatory supplies that diseases draw from. A new
/// disease item either reuses an existing item type (with the overlap
/// probability, or when fresh supplies run out) or builds a new one from
/// fresh supplies. Shared items keep the same alternatives, order and
/// quantities everywhere, and a supply belongs to at most one item type or
/// mandatory slot, so stock bought for one disease is always usable by any
/// other disease that can take it.
struct Catalog<'a> {
    fresh: std::ops::Range<usize>,
    items: Vec<TreatmentItem>,
    mandatory: Vec<SupplyId>,
    prices: &'a [i64],
}

impl Catalog<'_> {
    fn reuse<T>(rng: &mut ChaCha8Rng, pool: &[T], taken: &HashSet<T>) -> Option<T>
    where
        T: Copy + std::hash::Hash + Eq,
    {
        let candidates: Vec<T> = pool.iter().copied().filter(|x| !taken.contains(x)).collect();
        candidates.get(rng.random_range(0..candidates.len().max(1))).copied()
    }

    fn mandatory(&mut self, rng: &mut ChaCha8Rng, overlap: f64, taken: &HashSet<SupplyId>) -> Option<SupplyId> {
        if self.fresh.is_empty() || (!self.mandatory.is_empty() && rng.random_bool(overlap)) {
            if let Some(s) = Self::reuse(rng, &self.mandatory, taken) {
                return Some(s);
            }
        }
        let s = SupplyId::from_index(self.fresh.next()?);
        self.mandatory.push(s);
        Some(s)
    }

    /// Index of the item type for a disease that already uses `taken`.
    fn item(&mut self, rng: &mut ChaCha8Rng, spec: &GenSpec, taken: &HashSet<usize>) -> Option<usize> {
        if self.fresh.is_empty() || (!self.items.is_empty() && rng.random_bool(spec.overlap)) {
            if let Some(i) = Self::reuse(rng, &(0..self.items.len()).collect::<Vec<_>>(), taken) {
                return Some(i);
            }
        }
        let wanted = poisson_at_least_one(rng, spec.avg_alternatives).min(self.fresh.len());
        if wanted == 0 {
            return None;
        }
        let supplies: Vec<SupplyId> = self.fresh.by_ref().take(wanted).map(SupplyId::from_index).collect();
        self.items.push(build_item(rng, &supplies, self.prices, spec.effect_range));
        Some(self.items.len() - 1)
    }
}

fn poisson_at_least_one(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let draw: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    (draw as usize).max(1)
}

/// Splits `total` proportionally to `weights` with largest remainders.
fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = total - counts.iter().sum::<u64>();
    for &i in order.iter().cycle().take(short as usize) {
        counts[i] += 1;
    }
    counts
}

/// Generates a validated, feasible instance. The same spec always yields
/// the same instance.
pub fn generate(spec: &GenSpec) -> Result<ProcurementInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.price_range.0 as f64, spec.price_range.1 as f64);
    let prices: Vec<i64> = (0..spec.supplies)
        .map(|_| (lo * (hi / lo).powf(rng.random::<f64>())).round() as i64)
        .collect();

    let (epidemic_items, epidemic_effect) = epidemic_profile(&mut rng, spec, &prices);

    let mut catalog = Catalog {
        fresh: spec.epidemic_supplies()..spec.supplies,
        items: Vec::new(),
        mandatory: Vec::new(),
        prices: &prices,
    };
    let case_weights: Vec<f64> = (0..spec.diseases).map(|_| rng.random_range(0.5..1.5)).collect();
    let cases = apportion(spec.cases, &case_weights);
    let raw_weights: Vec<f64> = (0..spec.diseases).map(|_| rng.random_range(0.5..1.5)).collect();
    let weight_sum: f64 = raw_weights.iter().sum();

    let mut diseases = Vec::with_capacity(spec.diseases);
    for i in 0..spec.diseases {
        let mut taken = HashSet::new();
        let mut items = Vec::new();
        for _ in 0..rng.random_range(1..=2) {
            if let Some(s) = catalog.mandatory(&mut rng, spec.overlap, &taken) {
                taken.insert(s);
                items.push(TreatmentItem::mandatory(s, rng.random_range(1..=3)));
            }
        }
        let mandatory = items.len();
        let mut types = HashSet::new();
        for _ in 0..poisson_at_least_one(&mut rng, spec.avg_items) {
            if let Some(t) = catalog.item(&mut rng, spec, &types) {
                types.insert(t);
                items.push(catalog.items[t].clone());
            }
        }
        let alt_items: Vec<usize> = (mandatory..items.len()).collect();
        let effect_fn = random_effect_fn(&mut rng, &alt_items);
        let r = cases[i];
        diseases.push(DiseaseProfile {
            id: i as u32 + 1,
            name: format!("D{}", i + 1),
            items,
            effect_fn,
            weight: raw_weights[i] * spec.diseases as f64 / weight_sum,
            expected_cases: r,
            lower_cases: (0.7 * r as f64).floor() as u64,
            upper_cases: (1.2 * r as f64).ceil() as u64,
            suspect_prob: rng.random_range(spec.suspect_prob_range.0..=spec.suspect_prob_range.1),
            companions: rng.random_range(0.0..3.0),
            companion_suspect_prob: rng.random_range(0.0..=spec.suspect_prob_range.1 / 2.0),
            emergency: rng.random_bool(0.3),
        });
    }

    let supplies: Vec<Supply> = prices
        .iter()
        .enumerate()
        .map(|(k, &price)| Supply {
            id: SupplyId::from_index(k),
            name: format!("S{}", k + 1),
            unit_price: Cents(price),
            unit_volume: rng.random_range(0.1..5.0),
            inventory: 0,
        })
        .collect();
    let mut instance =
        ProcurementInstance::new(supplies, epidemic_items, epidemic_effect, diseases, Cents::ZERO, 15, 0.01)?;

    let demand = x_bounds(&instance).x_upper;
    for (supply, &d) in instance.supplies.iter_mut().zip(&demand) {
        if d > 0 && rng.random_bool(spec.inventory_fill) {
            supply.inventory = rng.random_range(1..=(d * 3 / 10).max(1));
        }
    }

    let division = divide(&instance);
    let mandatory = x_bounds(&instance).lower_cost(&instance);
    let cheapest: Cents = y_bounds(&instance, &division).y_lower.iter().sum();
    instance.budget = Cents((spec.beta * (mandatory + cheapest).get() as f64).ceil() as i64);
    instance.validate()?;
    Ok(instance)
}

/// Shape of random standalone subproblems.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemGenSpec {
    pub dimension: (usize, usize),
    pub cases: (u64, u64),
    /// Resample until the enumeration space is at most this large.
    pub max_space: f64,
    pub seed: u64,
}

impl Default for SubproblemGenSpec {
    fn default() -> Self {
        SubproblemGenSpec {
            dimension: (10, 15),
            cases: (3, 8),
            max_space: 2e5,
            seed: 0,
        }
    }
}

/// A random subproblem with its budget strictly between the cheapest and
/// the all-best cost, so the optimum is a real trade-off.
pub fn random_subproblem(spec: &SubproblemGenSpec) -> Result<SubproblemSpec> {
    let (dmin, dmax) = spec.dimension;
    if dmin < 2 || dmin > dmax || spec.cases.0 == 0 || spec.cases.0 > spec.cases.1 {
        return Err(Error::Config("invalid subproblem generator ranges".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..10_000 {
        let dimension = rng.random_range(dmin..=dmax);
        let item_count = rng.random_range(2..=(dimension / 2).clamp(2, 4));
        let mut sizes = vec![1usize; item_count];
        for _ in item_count..dimension {
            let j = rng.random_range(0..item_count);
            sizes[j] += 1;
        }
        if sizes.iter().any(|&s| s > 6) {
            continue;
        }
        let cases = rng.random_range(spec.cases.0..=spec.cases.1);
        let items: Vec<SpecItem> = sizes
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let effects = draw_effects(&mut rng, n, (0.2, 0.95));
                let mut costs: Vec<i64> = (0..n).map(|_| rng.random_range(1..=60)).collect();
                costs.sort_unstable_by(|a, b| b.cmp(a));
                for i in 1..n {
                    if rng.random_bool(PRICE_INVERSION) {
                        costs.swap(i - 1, i);
                    }
                }
                let stored = rng.random_range(0..n + 2);
                SpecItem {
                    alternatives: effects
                        .into_iter()
                        .zip(costs)
                        .enumerate()
                        .map(|(k, (effect, cost))| SpecAlternative {
                            supply: SupplyId((j * 10 + k) as u32 + 1),
                            quantity: 1,
                            case_cost: Cents(cost),
                            effect,
                            storage: u64::from(k == stored && cases > 1),
                        })
                        .collect(),
                }
            })
            .collect();
        let slots: Vec<usize> = (0..item_count).collect();
        let effect_fn = random_effect_fn(&mut rng, &slots).compile(&slots);
        let mut sub = SubproblemSpec::new(0, cases, Cents::ZERO, items, effect_fn)?;
        if oracle_size(&sub) > spec.max_space {
            continue;
        }
        let low = sub.cost_unchecked(&sub.cheapest());
        let high = sub.cost_unchecked(&sub.all_best());
        if high - low < Cents(4) {
            continue;
        }
        let span = (high - low).get() as f64;
        sub.budget = low + Cents((span * rng.random_range(0.2..0.8)).round() as i64);
        return Ok(sub);
    }
    Err(Error::Config("could not draw a subproblem within the size limit".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenSpec {
        GenSpec {
            diseases: 4,
            supplies: 60,
            cases: 120,
            seed: 11,
            ..GenSpec::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate(&small()).unwrap(), generate(&small()).unwrap());
        let other = GenSpec { seed: 12, ..small() };
        assert_ne!(generate(&small()).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn default_shape() {
        let spec = GenSpec { seed: 7, ..GenSpec::default() };
        let inst = generate(&spec).unwrap();
        assert_eq!(inst.diseases.len(), 20);
        assert_eq!(inst.supplies.len(), 300);
        assert_eq!(inst.diseases.iter().map(|d| d.expected_cases).sum::<u64>(), 2000);
    }

    #[test]
    fn beta_one_is_tight() {
        let inst = generate(&GenSpec { beta: 1.0, ..small() }).unwrap();
        let division = divide(&inst);
        let b = y_bounds(&inst, &division);
        assert_eq!(b.y_lower.iter().sum::<Cents>(), b.remaining_budget);
    }

    #[test]
    fn contradictory_specs_rejected() {
        for bad in [
            GenSpec { avg_alternatives: 0.5, ..small() },
            GenSpec { beta: 0.5, ..small() },
            GenSpec { supplies: 10, ..small() },
            GenSpec { diseases: 0, ..small() },
        ] {
            assert!(matches!(generate(&bad), Err(Error::Validation { .. })), "{bad:?}");
        }
    }

    #[test]
    fn apportion_hits_total() {
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(7, &[0.5, 0.25, 0.25]).iter().sum::<u64>(), 7);
    }

    #[test]
    fn random_subproblems_fit_the_oracle() {
        for seed in 0..20 {
            let sub = random_subproblem(&SubproblemGenSpec { seed, ..Default::default() }).unwrap();
            assert!((10..=15).contains(&sub.dimension()));
            assert!(oracle_size(&sub) <= 2e5);
            assert!(sub.cost_unchecked(&sub.cheapest()) <= sub.budget);
        }
    }
}
