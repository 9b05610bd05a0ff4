use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::NetError;

/// Identifier of a node in a diffusion network. The seller is always
/// [`NodeId::SELLER`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const SELLER: NodeId = NodeId(0);

    pub fn is_seller(self) -> bool {
        self == Self::SELLER
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_seller() {
            write!(f, "s")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Directed graph over the agents plus a distinguished seller. An edge
/// `i -> j` means `i` is able to inform `j` about the auction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffusionNetwork {
    agents: BTreeSet<NodeId>,
    out: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl DiffusionNetwork {
    pub fn new(
        agents: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, NetError> {
        let mut set = BTreeSet::new();
        for a in agents {
            if a.is_seller() {
                return Err(NetError::SellerAsAgent);
            }
            if !set.insert(a) {
                return Err(NetError::DuplicateAgent(a));
            }
        }
        let mut out: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        out.insert(NodeId::SELLER, BTreeSet::new());
        for &a in &set {
            out.insert(a, BTreeSet::new());
        }
        for (from, to) in edges {
            if to.is_seller() {
                return Err(NetError::EdgeIntoSeller(from));
            }
            if !out.contains_key(&from) {
                return Err(NetError::UnknownNode(from));
            }
            if !set.contains(&to) {
                return Err(NetError::UnknownNode(to));
            }
            if from == to {
                return Err(NetError::SelfLoop(from));
            }
            out.get_mut(&from).expect("checked above").insert(to);
        }
        Ok(Self { agents: set, out })
    }

    pub fn seller(&self) -> NodeId {
        NodeId::SELLER
    }

    pub fn agents(&self) -> &BTreeSet<NodeId> {
        &self.agents
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.is_seller() || self.agents.contains(&id)
    }

    /// True out-neighbours `r_i` of a node.
    pub fn neighbors(&self, id: NodeId) -> &BTreeSet<NodeId> {
        static EMPTY: BTreeSet<NodeId> = BTreeSet::new();
        self.out.get(&id).unwrap_or(&EMPTY)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out
            .iter()
            .flat_map(|(&from, tos)| tos.iter().map(move |&to| (from, to)))
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeSet::len).sum()
    }

    /// True when the part of the network reachable from the seller is a
    /// rooted tree (every reachable agent has exactly one reachable inviter).
    pub fn is_seller_tree(&self) -> bool {
        let reach = self.reachable_with(|id| self.neighbors(id));
        let mut indegree: BTreeMap<NodeId, usize> = BTreeMap::new();
        for (from, to) in self.edges() {
            if reach.contains(&from) || from.is_seller() {
                *indegree.entry(to).or_default() += 1;
            }
        }
        reach.iter().all(|id| indegree.get(id).copied() == Some(1))
    }

    /// Breadth-first reachability from the seller where each agent forwards
    /// to the set produced by `forward`.
    pub(crate) fn reachable_with<'b, F>(&self, forward: F) -> BTreeSet<NodeId>
    where
        F: Fn(NodeId) -> &'b BTreeSet<NodeId>,
    {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = self.neighbors(NodeId::SELLER).iter().copied().collect();
        for &c in &queue {
            seen.insert(c);
        }
        while let Some(k) = queue.pop_front() {
            for &j in forward(k) {
                if self.agents.contains(&j) && seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        seen
    }
}

/// True type `θ_i = (v_i, r_i)` of an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentType {
    pub valuation: f64,
    pub neighbors: BTreeSet<NodeId>,
}

/// A single agent's report together with its system-assigned timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub valuation: f64,
    pub neighbors: BTreeSet<NodeId>,
    pub timestamp: u64,
}

/// Reported types for every agent of a network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportProfile {
    reports: BTreeMap<NodeId, Report>,
}

impl ReportProfile {
    pub fn new(reports: BTreeMap<NodeId, Report>) -> Self {
        Self { reports }
    }

    /// Truthful reports: every agent reports its true neighbours. Timestamps
    /// follow breadth-first arrival order on the true network; unreachable
    /// agents get timestamps after all reachable ones.
    pub fn truthful(net: &DiffusionNetwork, valuations: &BTreeMap<NodeId, f64>) -> Self {
        let mut reports = BTreeMap::new();
        for &a in net.agents() {
            reports.insert(
                a,
                Report {
                    valuation: valuations.get(&a).copied().unwrap_or(0.0),
                    neighbors: net.neighbors(a).clone(),
                    timestamp: 0,
                },
            );
        }
        let mut profile = Self { reports };
        profile.assign_arrival_timestamps(net);
        profile
    }

    /// Overwrites timestamps with breadth-first arrival order over the
    /// reported edges (ties in ascending node id).
    pub fn assign_arrival_timestamps(&mut self, net: &DiffusionNetwork) {
        let mut order: Vec<NodeId> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NodeId> = VecDeque::new();
        for &c in net.neighbors(NodeId::SELLER) {
            if seen.insert(c) {
                queue.push_back(c);
            }
        }
        while let Some(k) = queue.pop_front() {
            order.push(k);
            if let Some(r) = self.reports.get(&k) {
                for &j in &r.neighbors {
                    if net.agents().contains(&j) && seen.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
        let mut next = 1u64;
        for id in order {
            if let Some(r) = self.reports.get_mut(&id) {
                r.timestamp = next;
                next += 1;
            }
        }
        for (id, r) in self.reports.iter_mut() {
            if !seen.contains(id) {
                r.timestamp = next;
                next += 1;
            }
        }
    }

    pub fn get(&self, id: NodeId) -> Option<&Report> {
        self.reports.get(&id)
    }

    pub fn valuation(&self, id: NodeId) -> f64 {
        self.reports.get(&id).map_or(0.0, |r| r.valuation)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Report)> {
        self.reports.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    /// Copy of this profile with agent `id`'s valuation and neighbour report
    /// replaced. Its timestamp is kept.
    pub fn with_report(&self, id: NodeId, valuation: f64, neighbors: BTreeSet<NodeId>) -> Self {
        let mut out = self.clone();
        if let Some(r) = out.reports.get_mut(&id) {
            r.valuation = valuation;
            r.neighbors = neighbors;
        }
        out
    }

    pub fn with_valuation(&self, id: NodeId, valuation: f64) -> Self {
        let mut out = self.clone();
        if let Some(r) = out.reports.get_mut(&id) {
            r.valuation = valuation;
        }
        out
    }

    pub fn set_valuation(&mut self, id: NodeId, valuation: f64) {
        if let Some(r) = self.reports.get_mut(&id) {
            r.valuation = valuation;
        }
    }

    /// Checks that reports exist for all agents, valuations are finite and
    /// non-negative, and every reported neighbour is a true out-neighbour.
    pub fn validate_against(&self, net: &DiffusionNetwork) -> Result<(), NetError> {
        for &a in net.agents() {
            let r = self.reports.get(&a).ok_or(NetError::MissingReport(a))?;
            if !r.valuation.is_finite() || r.valuation < 0.0 {
                return Err(NetError::BadValuation(a, r.valuation));
            }
            if let Some(&bad) = r.neighbors.iter().find(|j| !net.neighbors(a).contains(j)) {
                return Err(NetError::ReportedNonNeighbor { agent: a, neighbor: bad });
            }
        }
        if let Some((&extra, _)) = self.reports.iter().find(|(k, _)| !net.agents().contains(k)) {
            return Err(NetError::UnknownNode(extra));
        }
        Ok(())
    }
}

/// A network together with the truthful report profile of its agents. The
/// verifier deviates from this profile one agent at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub network: DiffusionNetwork,
    pub reports: ReportProfile,
}

impl Instance {
    pub fn new(network: DiffusionNetwork, reports: ReportProfile) -> Result<Self, NetError> {
        reports.validate_against(&network)?;
        Ok(Self { network, reports })
    }

    pub fn truthful(network: DiffusionNetwork, valuations: &BTreeMap<NodeId, f64>) -> Self {
        let reports = ReportProfile::truthful(&network, valuations);
        Self { network, reports }
    }

    pub fn max_valuation(&self) -> f64 {
        self.reports.iter().map(|(_, r)| r.valuation).fold(0.0, f64::max)
    }
}

/// Agents reachable from the seller when each agent forwards only to its
/// reported neighbours. The seller always forwards to all of its neighbours.
pub fn filter_subnetwork(net: &DiffusionNetwork, reports: &ReportProfile) -> BTreeSet<NodeId> {
    static EMPTY: BTreeSet<NodeId> = BTreeSet::new();
    net.reachable_with(|id| reports.get(id).map_or(&EMPTY, |r| &r.neighbors))
}
