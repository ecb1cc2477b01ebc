//! Problem data: supplies, treatment profiles, effect functions, and the
//! procurement instance that ties them together.
//!
//! Profiles are addressed by a single index throughout the crate: index `0`
//! is the epidemic-control profile and index `i` (for `1..=m`) is disease
//! `D_i`. Supplies are addressed by their 1-based [`SupplyId`].

mod file;

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::money::Cents;

pub use file::{load_instance, save_instance};

/// Tolerance used when checking that group weights sum to one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Tolerance absorbed before rounding fractional case counts up.
pub(crate) const CEIL_TOLERANCE: f64 = 1e-9;

/// 1-based supply identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SupplyId(pub u32);

impl SupplyId {
    /// Position of the supply in [`ProcurementInstance::supplies`].
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        SupplyId(index as u32 + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Supply {
    pub id: SupplyId,
    pub name: String,
    pub unit_price: Cents,
    /// Stored for completeness; no constraint uses it.
    pub unit_volume: f64,
    pub inventory: u64,
}

/// One interchangeable supply for a treatment item.
#[derive(Clone, Debug, PartialEq)]
pub struct Alternative {
    pub supply: SupplyId,
    /// Units consumed per treated case.
    pub quantity: u32,
    pub effect: f64,
}

/// One step of a treatment. Mandatory items have exactly one alternative and
/// take no part in the effect function.
#[derive(Clone, Debug, PartialEq)]
pub struct TreatmentItem {
    pub mandatory: bool,
    pub alternatives: Vec<Alternative>,
}

impl TreatmentItem {
    pub fn mandatory(supply: SupplyId, quantity: u32) -> Self {
        TreatmentItem {
            mandatory: true,
            alternatives: vec![Alternative {
                supply,
                quantity,
                effect: 1.0,
            }],
        }
    }

    pub fn alternatives(alternatives: Vec<Alternative>) -> Self {
        TreatmentItem {
            mandatory: false,
            alternatives,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedItem {
    /// Index into the owning profile's `items`.
    pub item: usize,
    pub weight: f64,
}

/// Per-case effect as a product over groups of weighted sums within each
/// group.
///
/// A single group expresses a plain weighted sum; singleton groups with unit
/// weight express a plain product.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EffectFunction {
    groups: Vec<Vec<WeightedItem>>,
}

impl EffectFunction {
    pub fn new(groups: Vec<Vec<WeightedItem>>) -> Self {
        EffectFunction { groups }
    }

    /// Convenience constructor from `(item, weight)` pairs.
    pub fn from_pairs(groups: &[&[(usize, f64)]]) -> Self {
        EffectFunction::new(
            groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|&(item, weight)| WeightedItem { item, weight })
                        .collect()
                })
                .collect(),
        )
    }

    /// Plain weighted sum over the given items.
    pub fn weighted_sum(terms: &[(usize, f64)]) -> Self {
        EffectFunction::from_pairs(&[terms])
    }

    pub fn groups(&self) -> &[Vec<WeightedItem>] {
        &self.groups
    }

    /// Item indices covered by the function, ascending.
    pub fn covered_items(&self) -> Vec<usize> {
        let mut items: Vec<usize> = self.groups.iter().flatten().map(|t| t.item).collect();
        items.sort_unstable();
        items.dedup();
        items
    }

    /// Evaluates the function. `chosen_effects` holds one effect per covered
    /// item, in ascending item order.
    pub fn eval(&self, chosen_effects: &[f64]) -> Result<f64> {
        let compiled = self.compile(&self.covered_items());
        if chosen_effects.len() != compiled.slots {
            return Err(Error::Structural(format!(
                "effect function covers {} items but {} effects were given",
                compiled.slots,
                chosen_effects.len()
            )));
        }
        Ok(compiled.eval(chosen_effects))
    }

    /// Resolves item indices to slot positions within `slot_items`.
    ///
    /// Panics if a covered item is missing from `slot_items`; validated
    /// instances never trigger this.
    pub fn compile(&self, slot_items: &[usize]) -> CompiledEffect {
        let mut terms = Vec::new();
        let mut ends = Vec::with_capacity(self.groups.len());
        for group in &self.groups {
            for term in group {
                let slot = slot_items
                    .iter()
                    .position(|&i| i == term.item)
                    .expect("effect function item outside the slot map");
                terms.push((slot, term.weight));
            }
            ends.push(terms.len());
        }
        CompiledEffect {
            terms,
            ends,
            slots: slot_items.len(),
        }
    }
}

/// An [`EffectFunction`] with item indices resolved to dense slots, for hot
/// loops.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledEffect {
    terms: Vec<(usize, f64)>,
    ends: Vec<usize>,
    slots: usize,
}

impl CompiledEffect {
    pub fn slots(&self) -> usize {
        self.slots
    }

    #[inline]
    pub fn eval(&self, effects: &[f64]) -> f64 {
        let mut product = 1.0;
        let mut start = 0;
        for &end in &self.ends {
            let mut sum = 0.0;
            for &(slot, weight) in &self.terms[start..end] {
                sum += weight * effects[slot];
            }
            product *= sum;
            start = end;
        }
        product
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiseaseProfile {
    pub id: u32,
    pub name: String,
    /// Mandatory items first, then the alternative items.
    pub items: Vec<TreatmentItem>,
    pub effect_fn: EffectFunction,
    pub weight: f64,
    pub expected_cases: u64,
    pub lower_cases: u64,
    pub upper_cases: u64,
    pub suspect_prob: f64,
    pub companions: f64,
    pub companion_suspect_prob: f64,
    /// Emergency diseases run on a 24-hour clock, others on 8 working hours.
    pub emergency: bool,
}

impl DiseaseProfile {
    pub fn working_hours(&self) -> u64 {
        if self.emergency {
            24
        } else {
            8
        }
    }

    /// Expected suspected infections per case, `p_i + p'_i r'_i`.
    pub fn suspect_rate(&self) -> f64 {
        self.suspect_prob + self.companion_suspect_prob * self.companions
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpidemicProfile {
    pub items: Vec<TreatmentItem>,
    pub effect_fn: EffectFunction,
    /// Derived; see [`ProcurementInstance::compute_suspected_cases`].
    pub suspected_cases: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcurementInstance {
    pub supplies: Vec<Supply>,
    pub epidemic: EpidemicProfile,
    pub diseases: Vec<DiseaseProfile>,
    pub budget: Cents,
    pub cycle_days: u32,
    pub local_incidence: f64,
}

/// Borrowed view of one profile (epidemic or disease).
#[derive(Clone, Copy, Debug)]
pub struct ProfileRef<'a> {
    pub index: usize,
    pub items: &'a [TreatmentItem],
    pub effect_fn: &'a EffectFunction,
}

impl<'a> ProfileRef<'a> {
    pub fn is_epidemic(&self) -> bool {
        self.index == 0
    }

    /// Indices of the non-mandatory items, ascending.
    pub fn alternative_items(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, item)| !item.mandatory)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn compiled_effect(&self) -> CompiledEffect {
        self.effect_fn.compile(&self.alternative_items())
    }

    pub fn label(&self) -> String {
        if self.is_epidemic() {
            "epidemic".to_owned()
        } else {
            format!("D{}", self.index)
        }
    }
}

impl ProcurementInstance {
    /// Builds an instance, sorting alternatives into canonical order,
    /// deriving `r_0`, and validating every invariant.
    pub fn new(
        supplies: Vec<Supply>,
        epidemic_items: Vec<TreatmentItem>,
        epidemic_effect: EffectFunction,
        diseases: Vec<DiseaseProfile>,
        budget: Cents,
        cycle_days: u32,
        local_incidence: f64,
    ) -> Result<Self> {
        let mut instance = ProcurementInstance {
            supplies,
            epidemic: EpidemicProfile {
                items: epidemic_items,
                effect_fn: epidemic_effect,
                suspected_cases: 0,
            },
            diseases,
            budget,
            cycle_days,
            local_incidence,
        };
        instance.validate_references()?;
        instance.canonicalize();
        instance.validate()?;
        Ok(instance)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_instance(path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_instance(self, path)
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        file::from_json_str(json, "<input>")
    }

    pub fn to_json_string(&self) -> String {
        file::to_json_string(self)
    }

    pub fn supply(&self, id: SupplyId) -> &Supply {
        &self.supplies[id.index()]
    }

    pub fn price(&self, id: SupplyId) -> Cents {
        self.supplies[id.index()].unit_price
    }

    /// Number of profiles, `m + 1`.
    pub fn profile_count(&self) -> usize {
        self.diseases.len() + 1
    }

    pub fn profile(&self, index: usize) -> ProfileRef<'_> {
        if index == 0 {
            ProfileRef {
                index,
                items: &self.epidemic.items,
                effect_fn: &self.epidemic.effect_fn,
            }
        } else {
            let d = &self.diseases[index - 1];
            ProfileRef {
                index,
                items: &d.items,
                effect_fn: &d.effect_fn,
            }
        }
    }

    pub fn profiles(&self) -> impl Iterator<Item = ProfileRef<'_>> {
        (0..self.profile_count()).map(move |p| self.profile(p))
    }

    /// Expected case count of a profile: `r_0` for epidemic control, `r_i`
    /// for diseases.
    pub fn expected_cases(&self, profile: usize) -> u64 {
        if profile == 0 {
            self.epidemic.suspected_cases
        } else {
            self.diseases[profile - 1].expected_cases
        }
    }

    /// Total cost of buying `quantities[k]` units of every supply.
    pub fn plan_cost(&self, quantities: &[u64]) -> Cents {
        self.supplies
            .iter()
            .zip(quantities)
            .map(|(s, &x)| s.unit_price.times(x))
            .sum()
    }

    /// Supplies referenced by the epidemic profile only, and by anything
    /// else; the `(n, n')` split.
    pub fn supply_split(&self) -> (usize, usize) {
        let epidemic: HashSet<SupplyId> = alt_supplies(&self.epidemic.items).collect();
        let disease: HashSet<SupplyId> = self
            .diseases
            .iter()
            .flat_map(|d| alt_supplies(&d.items))
            .collect();
        let n = epidemic.difference(&disease).count();
        (n, self.supplies.len() - n)
    }

    /// Computes `r_0 = ceil(sum_i (p_i + p'_i r'_i) * upper_i)`, stores it
    /// on the epidemic profile, and returns it.
    pub fn compute_suspected_cases(&mut self) -> u64 {
        let r0 = suspected_cases(&self.diseases);
        self.epidemic.suspected_cases = r0;
        r0
    }

    /// Sorts every non-mandatory alternative list by effect descending,
    /// then price, then supply id, and derives `r_0`.
    pub fn canonicalize(&mut self) {
        let prices: Vec<Cents> = self.supplies.iter().map(|s| s.unit_price).collect();
        let sort_items = |items: &mut Vec<TreatmentItem>| {
            for item in items.iter_mut().filter(|i| !i.mandatory) {
                item.alternatives.sort_by(|a, b| {
                    b.effect
                        .total_cmp(&a.effect)
                        .then(prices[a.supply.index()].cmp(&prices[b.supply.index()]))
                        .then(a.supply.cmp(&b.supply))
                });
            }
        };
        sort_items(&mut self.epidemic.items);
        for d in &mut self.diseases {
            sort_items(&mut d.items);
        }
        self.compute_suspected_cases();
    }

    fn validate_references(&self) -> Result<()> {
        for (p, profile) in self.profiles().enumerate() {
            for (j, item) in profile.items.iter().enumerate() {
                for (k, alt) in item.alternatives.iter().enumerate() {
                    if alt.supply.0 == 0 || alt.supply.index() >= self.supplies.len() {
                        return Err(Error::validation(
                            format!("{}.items[{j}].alternatives[{k}].supply", profile_path(p)),
                            format!("unknown supply id {}", alt.supply.0),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks every model invariant; see the module docs for the list.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.supplies.iter().enumerate() {
            let loc = format!("supplies[{i}]");
            if s.id != SupplyId::from_index(i) {
                return Err(Error::validation(
                    format!("{loc}.id"),
                    format!("supply ids must be contiguous from 1; found {} at position {i}", s.id.0),
                ));
            }
            if s.unit_price < Cents::ZERO {
                return Err(Error::validation(format!("{loc}.price_cents"), "negative price"));
            }
            if !(s.unit_volume.is_finite() && s.unit_volume >= 0.0) {
                return Err(Error::validation(format!("{loc}.volume"), "volume must be finite and nonnegative"));
            }
        }
        self.validate_references()?;
        for profile in self.profiles() {
            validate_profile(profile)?;
        }
        for (i, d) in self.diseases.iter().enumerate() {
            let loc = format!("diseases[{i}]");
            if d.id as usize != i + 1 {
                return Err(Error::validation(
                    format!("{loc}.id"),
                    format!("disease ids must be contiguous from 1; found {}", d.id),
                ));
            }
            if !(d.lower_cases <= d.expected_cases && d.expected_cases <= d.upper_cases) {
                return Err(Error::validation(
                    loc,
                    format!(
                        "case estimates must satisfy lower <= expected <= upper; got {} <= {} <= {}",
                        d.lower_cases, d.expected_cases, d.upper_cases
                    ),
                ));
            }
            for (field, value) in [
                ("suspect_prob", d.suspect_prob),
                ("companion_suspect_prob", d.companion_suspect_prob),
            ] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::validation(format!("{loc}.{field}"), format!("{value} is not a probability")));
                }
            }
            if !(d.companions.is_finite() && d.companions >= 0.0) {
                return Err(Error::validation(format!("{loc}.companions"), "must be finite and nonnegative"));
            }
            if !(d.weight.is_finite() && d.weight >= 0.0) {
                return Err(Error::validation(format!("{loc}.weight"), "must be finite and nonnegative"));
            }
        }
        if self.budget < Cents::ZERO {
            return Err(Error::validation("budget_cents", "negative budget"));
        }
        if self.cycle_days == 0 {
            return Err(Error::validation("cycle_days", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.local_incidence) {
            return Err(Error::validation("local_incidence", "not a probability"));
        }
        Ok(())
    }
}

/// `ceil(sum_i (p_i + p'_i r'_i) * upper_i)`, summed in disease order.
pub fn suspected_cases(diseases: &[DiseaseProfile]) -> u64 {
    let total: f64 = diseases
        .iter()
        .map(|d| d.suspect_rate() * d.upper_cases as f64)
        .sum();
    (total - CEIL_TOLERANCE).ceil().max(0.0) as u64
}

fn alt_supplies(items: &[TreatmentItem]) -> impl Iterator<Item = SupplyId> + '_ {
    items.iter().flat_map(|i| i.alternatives.iter().map(|a| a.supply))
}

fn profile_path(index: usize) -> String {
    if index == 0 {
        "epidemic".to_owned()
    } else {
        format!("diseases[{}]", index - 1)
    }
}

fn validate_profile(profile: ProfileRef<'_>) -> Result<()> {
    let base = profile_path(profile.index);
    let mut seen_alternative_item = false;
    for (j, item) in profile.items.iter().enumerate() {
        let loc = format!("{base}.items[{j}]");
        if item.alternatives.is_empty() {
            return Err(Error::validation(loc, "item has no alternatives"));
        }
        if item.mandatory {
            if seen_alternative_item {
                return Err(Error::validation(loc, "mandatory items must precede alternative items"));
            }
            if item.alternatives.len() != 1 {
                return Err(Error::validation(loc, "mandatory items take exactly one supply"));
            }
            if item.alternatives[0].effect != 1.0 {
                return Err(Error::validation(format!("{loc}.alternatives[0].effect"), "mandatory items carry effect 1"));
            }
        } else {
            seen_alternative_item = true;
        }
        let mut seen = HashSet::new();
        for (k, alt) in item.alternatives.iter().enumerate() {
            let aloc = format!("{loc}.alternatives[{k}]");
            if alt.quantity == 0 {
                return Err(Error::validation(format!("{aloc}.qty"), "quantity must be positive"));
            }
            if !(0.0..=1.0).contains(&alt.effect) {
                return Err(Error::validation(format!("{aloc}.effect"), format!("effect {} outside [0, 1]", alt.effect)));
            }
            if !seen.insert(alt.supply) {
                return Err(Error::validation(aloc, format!("supply {} listed twice in one item", alt.supply.0)));
            }
        }
    }

    let mut covered = HashSet::new();
    for (g, group) in profile.effect_fn.groups().iter().enumerate() {
        let loc = format!("{base}.effect_groups[{g}]");
        if group.is_empty() {
            return Err(Error::validation(loc, "empty effect group"));
        }
        let mut sum = 0.0;
        for (t, term) in group.iter().enumerate() {
            let tloc = format!("{loc}[{t}]");
            if !(term.weight.is_finite() && term.weight > 0.0) {
                return Err(Error::validation(format!("{tloc}.weight"), "weights must be positive"));
            }
            match profile.items.get(term.item) {
                None => {
                    return Err(Error::validation(format!("{tloc}.item"), format!("no item {}", term.item)));
                }
                Some(item) if item.mandatory => {
                    return Err(Error::validation(format!("{tloc}.item"), format!("item {} is mandatory", term.item)));
                }
                Some(_) => {}
            }
            if !covered.insert(term.item) {
                return Err(Error::validation(format!("{tloc}.item"), format!("item {} appears in more than one term", term.item)));
            }
            sum += term.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::validation(loc, format!("weights sum to {sum}, expected 1")));
        }
    }
    for j in profile.alternative_items() {
        if !covered.contains(&j) {
            return Err(Error::validation(
                format!("{base}.effect_groups"),
                format!("alternative item {j} is not covered by the effect function"),
            ));
        }
    }
    Ok(())
}

/// The canonical two-profile instance used throughout tests and docs.
///
/// Epidemic control needs one unit of `S1` plus one of `S2` (effect 1, 10c)
/// or `S3` (effect 0.5, 2c). Disease `D1` needs one unit of `S4` plus one of
/// `S5` (effect 1, 5c) or `S6` (effect 0.6, 1c), with four expected cases,
/// a lower estimate of two, and suspect probability 0.25. Nothing is in
/// stock and the budget is 35 cents.
pub fn tiny() -> ProcurementInstance {
    ProcurementInstance::from_json_str(TINY_JSON).expect("bundled tiny instance is valid")
}

pub const TINY_JSON: &str = include_str!("../../data/tiny.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn eq1() -> EffectFunction {
        EffectFunction::from_pairs(&[&[(0, 0.4), (1, 0.6)], &[(2, 1.0)], &[(3, 0.2), (4, 0.8)], &[(5, 1.0)]])
    }

    #[test]
    fn eq1_all_ones_is_one() {
        assert_eq!(eq1().eval(&[1.0; 6]).unwrap(), 1.0);
    }

    #[test]
    fn eq1_normal_gown() {
        let v = eq1().eval(&[0.7, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((v - 0.88).abs() < 1e-12, "{v}");
    }

    #[test]
    fn single_group_weighted_sum() {
        let f = EffectFunction::weighted_sum(&[(1, 0.5), (2, 0.5)]);
        let v = f.eval(&[0.2, 0.6]).unwrap();
        assert!((v - 0.4).abs() < 1e-12);
    }

    #[test]
    fn eval_rejects_length_mismatch() {
        assert!(matches!(eq1().eval(&[1.0; 5]), Err(Error::Structural(_))));
    }

    fn disease(p: f64, p2: f64, r2: f64, upper: u64) -> DiseaseProfile {
        let mut d = tiny().diseases[0].clone();
        d.suspect_prob = p;
        d.companion_suspect_prob = p2;
        d.companions = r2;
        d.upper_cases = upper;
        d.expected_cases = upper;
        d.lower_cases = 0;
        d
    }

    #[test]
    fn suspected_cases_examples() {
        assert_eq!(suspected_cases(&[disease(0.25, 0.0, 0.0, 4)]), 1);
        assert_eq!(suspected_cases(&[disease(0.1, 0.05, 2.0, 100)]), 20);
        assert_eq!(suspected_cases(&[disease(0.0, 0.0, 3.0, 100)]), 0);
        assert_eq!(suspected_cases(&[]), 0);
    }

    #[test]
    fn tiny_shape() {
        let t = tiny();
        assert_eq!(t.supplies.len(), 6);
        assert_eq!(t.profile_count(), 2);
        assert_eq!(t.epidemic.suspected_cases, 1);
        assert_eq!(t.expected_cases(1), 4);
        assert_eq!(t.supply_split(), (3, 3));
    }

    #[test]
    fn canonical_order_sorts_by_effect_price_id() {
        let mut t = tiny();
        t.diseases[0].items[1].alternatives.reverse();
        t.canonicalize();
        assert_eq!(t, tiny());
    }

    #[test]
    fn rejects_mandatory_after_alternative() {
        let mut t = tiny();
        t.diseases[0].items.swap(0, 1);
        t.diseases[0].effect_fn = EffectFunction::weighted_sum(&[(0, 1.0)]);
        let err = t.validate().unwrap_err();
        assert!(err.to_string().contains("precede"), "{err}");
    }

    #[test]
    fn rejects_bad_case_order() {
        let mut t = tiny();
        t.diseases[0].lower_cases = 5;
        assert!(matches!(t.validate(), Err(Error::Validation { .. })));
    }

    #[test]
    fn rejects_uncovered_item() {
        let mut t = tiny();
        t.epidemic.effect_fn = EffectFunction::default();
        let err = t.validate().unwrap_err();
        assert!(err.to_string().contains("not covered"), "{err}");
    }
}
