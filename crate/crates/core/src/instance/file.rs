//! JSON instance format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    Alternative, DiseaseProfile, EffectFunction, ProcurementInstance, Supply, SupplyId, TreatmentItem,
    WeightedItem,
};
use crate::error::{Error, Result};
use crate::money::Cents;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    supplies: Vec<SupplyFile>,
    epidemic: EpidemicFile,
    diseases: Vec<DiseaseFile>,
    budget_cents: i64,
    cycle_days: u32,
    local_incidence: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupplyFile {
    id: u32,
    name: String,
    price_cents: i64,
    volume: f64,
    inventory: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpidemicFile {
    items: Vec<ItemFile>,
    effect_groups: Vec<Vec<TermFile>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemFile {
    mandatory: bool,
    alternatives: Vec<AlternativeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlternativeFile {
    supply: u32,
    qty: u32,
    effect: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    item: usize,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiseaseFile {
    id: u32,
    name: String,
    items: Vec<ItemFile>,
    effect_groups: Vec<Vec<TermFile>>,
    weight: f64,
    expected_cases: u64,
    lower_cases: u64,
    upper_cases: u64,
    suspect_prob: f64,
    companions: f64,
    companion_suspect_prob: f64,
    emergency: bool,
}

fn items_from(items: Vec<ItemFile>) -> Vec<TreatmentItem> {
    items
        .into_iter()
        .map(|i| TreatmentItem {
            mandatory: i.mandatory,
            alternatives: i
                .alternatives
                .into_iter()
                .map(|a| Alternative {
                    supply: SupplyId(a.supply),
                    quantity: a.qty,
                    effect: a.effect,
                })
                .collect(),
        })
        .collect()
}

fn items_to(items: &[TreatmentItem]) -> Vec<ItemFile> {
    items
        .iter()
        .map(|i| ItemFile {
            mandatory: i.mandatory,
            alternatives: i
                .alternatives
                .iter()
                .map(|a| AlternativeFile {
                    supply: a.supply.0,
                    qty: a.quantity,
                    effect: a.effect,
                })
                .collect(),
        })
        .collect()
}

fn effect_from(groups: Vec<Vec<TermFile>>) -> EffectFunction {
    EffectFunction::new(
        groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|t| WeightedItem {
                        item: t.item,
                        weight: t.weight,
                    })
                    .collect()
            })
            .collect(),
    )
}

fn effect_to(f: &EffectFunction) -> Vec<Vec<TermFile>> {
    f.groups()
        .iter()
        .map(|g| {
            g.iter()
                .map(|t| TermFile {
                    item: t.item,
                    weight: t.weight,
                })
                .collect()
        })
        .collect()
}

pub(super) fn from_json_str(json: &str, origin: &str) -> Result<ProcurementInstance> {
    let file: InstanceFile = serde_json::from_str(json).map_err(|e| Error::Parse {
        location: format!("{origin}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let supplies = file
        .supplies
        .into_iter()
        .map(|s| Supply {
            id: SupplyId(s.id),
            name: s.name,
            unit_price: Cents(s.price_cents),
            unit_volume: s.volume,
            inventory: s.inventory,
        })
        .collect();
    let diseases = file
        .diseases
        .into_iter()
        .map(|d| DiseaseProfile {
            id: d.id,
            name: d.name,
            items: items_from(d.items),
            effect_fn: effect_from(d.effect_groups),
            weight: d.weight,
            expected_cases: d.expected_cases,
            lower_cases: d.lower_cases,
            upper_cases: d.upper_cases,
            suspect_prob: d.suspect_prob,
            companions: d.companions,
            companion_suspect_prob: d.companion_suspect_prob,
            emergency: d.emergency,
        })
        .collect();
    ProcurementInstance::new(
        supplies,
        items_from(file.epidemic.items),
        effect_from(file.epidemic.effect_groups),
        diseases,
        Cents(file.budget_cents),
        file.cycle_days,
        file.local_incidence,
    )
}

pub(super) fn to_json_string(instance: &ProcurementInstance) -> String {
    let file = InstanceFile {
        supplies: instance
            .supplies
            .iter()
            .map(|s| SupplyFile {
                id: s.id.0,
                name: s.name.clone(),
                price_cents: s.unit_price.get(),
                volume: s.unit_volume,
                inventory: s.inventory,
            })
            .collect(),
        epidemic: EpidemicFile {
            items: items_to(&instance.epidemic.items),
            effect_groups: effect_to(&instance.epidemic.effect_fn),
        },
        diseases: instance
            .diseases
            .iter()
            .map(|d| DiseaseFile {
                id: d.id,
                name: d.name.clone(),
                items: items_to(&d.items),
                effect_groups: effect_to(&d.effect_fn),
                weight: d.weight,
                expected_cases: d.expected_cases,
                lower_cases: d.lower_cases,
                upper_cases: d.upper_cases,
                suspect_prob: d.suspect_prob,
                companions: d.companions,
                companion_suspect_prob: d.companion_suspect_prob,
                emergency: d.emergency,
            })
            .collect(),
        budget_cents: instance.budget.get(),
        cycle_days: instance.cycle_days,
        local_incidence: instance.local_incidence,
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

/// Reads and validates an instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<ProcurementInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text, &path.display().to_string())
}

pub fn save_instance(instance: &ProcurementInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json_string(instance);
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
