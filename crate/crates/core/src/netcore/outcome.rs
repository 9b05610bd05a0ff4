use std::collections::BTreeMap;

use serde::Serialize;

use super::network::NodeId;

const EPS: f64 = 1e-9;

/// Allocation probabilities and signed payments produced by a mechanism.
/// A positive payment means the agent pays. An all-zero allocation means the
/// item is not sold.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Outcome {
    pub allocation: BTreeMap<NodeId, f64>,
    pub payments: BTreeMap<NodeId, f64>,
    pub seller_revenue: f64,
}

impl Outcome {
    pub fn unsold(agents: impl IntoIterator<Item = NodeId>) -> Self {
        let mut allocation = BTreeMap::new();
        let mut payments = BTreeMap::new();
        for a in agents {
            allocation.insert(a, 0.0);
            payments.insert(a, 0.0);
        }
        Self { allocation, payments, seller_revenue: 0.0 }
    }

    pub fn allocation_of(&self, id: NodeId) -> f64 {
        self.allocation.get(&id).copied().unwrap_or(0.0)
    }

    pub fn payment_of(&self, id: NodeId) -> f64 {
        self.payments.get(&id).copied().unwrap_or(0.0)
    }

    /// Utility `v * g - p` of an agent whose true valuation is `value`.
    pub fn utility(&self, id: NodeId, value: f64) -> f64 {
        value * self.allocation_of(id) - self.payment_of(id)
    }

    /// The agent receiving the item with probability one, if any.
    pub fn winner(&self) -> Option<NodeId> {
        self.allocation
            .iter()
            .find(|(_, &g)| (g - 1.0).abs() <= EPS)
            .map(|(&id, _)| id)
    }

    pub fn is_sold(&self) -> bool {
        self.allocation.values().any(|&g| g > EPS)
    }

    pub fn total_allocation(&self) -> f64 {
        self.allocation.values().sum()
    }

    pub fn total_payments(&self) -> f64 {
        self.payments.values().sum()
    }

    /// Allocation entries in `[0, 1]` summing to at most one.
    pub fn is_feasible(&self) -> bool {
        self.allocation.values().all(|&g| (-EPS..=1.0 + EPS).contains(&g))
            && self.total_allocation() <= 1.0 + EPS
    }
}
