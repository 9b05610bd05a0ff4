//! JSON instance files:
//! `{seller, agents: [{id, valuation, neighbors, timestamp}], edges: [[from, to], ...]}`.
//!
//! `neighbors` is the reported neighbour set and defaults to all true
//! out-neighbours when omitted. `timestamp` defaults to breadth-first arrival
//! order. An agent may also carry an `exponent` (used by LbLEV) and a display
//! `label`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::network::{DiffusionNetwork, Instance, NodeId, Report, ReportProfile};
use super::NetError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: NodeId,
    pub valuation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbors: Option<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub seller: NodeId,
    pub agents: Vec<AgentRecord>,
    pub edges: Vec<[NodeId; 2]>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    pub fn network(&self) -> Result<DiffusionNetwork, NetError> {
        if !self.seller.is_seller() {
            return Err(NetError::UnknownNode(self.seller));
        }
        DiffusionNetwork::new(
            self.agents.iter().map(|a| a.id),
            self.edges.iter().map(|&[from, to]| (from, to)),
        )
    }

    pub fn instance(&self) -> Result<Instance, NetError> {
        let network = self.network()?;
        let mut reports = BTreeMap::new();
        for a in &self.agents {
            let neighbors: BTreeSet<NodeId> = match &a.neighbors {
                Some(list) => list.iter().copied().collect(),
                None => network.neighbors(a.id).clone(),
            };
            reports.insert(a.id, Report { valuation: a.valuation, neighbors, timestamp: 0 });
        }
        let mut profile = ReportProfile::new(reports);
        profile.assign_arrival_timestamps(&network);
        let explicit: BTreeMap<NodeId, u64> =
            self.agents.iter().filter_map(|a| a.timestamp.map(|t| (a.id, t))).collect();
        if !explicit.is_empty() {
            let merged = profile
                .iter()
                .map(|(id, r)| {
                    let mut r = r.clone();
                    if let Some(&t) = explicit.get(&id) {
                        r.timestamp = t;
                    }
                    (id, r)
                })
                .collect();
            profile = ReportProfile::new(merged);
        }
        Instance::new(network, profile)
    }

    /// Exponents given inline on agent records.
    pub fn exponents(&self) -> BTreeMap<NodeId, f64> {
        self.agents.iter().filter_map(|a| a.exponent.map(|t| (a.id, t))).collect()
    }

    pub fn labels(&self) -> BTreeMap<NodeId, String> {
        self.agents.iter().filter_map(|a| a.label.clone().map(|l| (a.id, l))).collect()
    }

    pub fn from_instance(instance: &Instance, exponents: Option<&BTreeMap<NodeId, f64>>) -> Self {
        let agents = instance
            .reports
            .iter()
            .map(|(id, r)| AgentRecord {
                id,
                valuation: r.valuation,
                neighbors: Some(r.neighbors.iter().copied().collect()),
                timestamp: Some(r.timestamp),
                exponent: exponents.and_then(|e| e.get(&id).copied()),
                label: None,
            })
            .collect();
        let edges = instance.network.edges().map(|(a, b)| [a, b]).collect();
        Self { seller: NodeId::SELLER, agents, edges }
    }
}
