//! Decision vectors of the original and transformed problems.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::instance::{ProcurementInstance, SupplyId};
use crate::money::Cents;

/// Units to buy of every supply, indexed by supply position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PurchasePlan(pub Vec<u64>);

impl PurchasePlan {
    pub fn zeros(supplies: usize) -> Self {
        PurchasePlan(vec![0; supplies])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cost(&self, instance: &ProcurementInstance) -> Cents {
        instance.plan_cost(&self.0)
    }

    /// Adds `units` of `supply`, returning `self` for chaining.
    pub fn with(mut self, supply: SupplyId, units: u64) -> Self {
        self.0[supply.index()] += units;
        self
    }
}

impl Index<SupplyId> for PurchasePlan {
    type Output = u64;
    fn index(&self, id: SupplyId) -> &u64 {
        &self.0[id.index()]
    }
}

impl IndexMut<SupplyId> for PurchasePlan {
    fn index_mut(&mut self, id: SupplyId) -> &mut u64 {
        &mut self.0[id.index()]
    }
}

/// Budget per profile: index 0 is epidemic control, `i` is disease `D_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BudgetAllocation(pub Vec<Cents>);

impl BudgetAllocation {
    pub fn from_cents(values: &[i64]) -> Self {
        BudgetAllocation(values.iter().copied().map(Cents).collect())
    }

    pub fn total(&self) -> Cents {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
