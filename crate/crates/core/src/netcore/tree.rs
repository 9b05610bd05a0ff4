use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;

use super::network::{filter_subnetwork, DiffusionNetwork, NodeId, ReportProfile};
use super::NetError;

/// Tree rooted at the seller spanning the reachable agents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferralTree {
    parent: BTreeMap<NodeId, NodeId>,
    children: BTreeMap<NodeId, Vec<NodeId>>,
    level: BTreeMap<NodeId, usize>,
}

impl ReferralTree {
    /// Builds a tree from an explicit parent map. Every parent must be the
    /// seller or another key of the map, and the result must be acyclic.
    pub fn from_parents(parents: BTreeMap<NodeId, NodeId>) -> Result<Self, NetError> {
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        children.insert(NodeId::SELLER, Vec::new());
        for (&child, &parent) in &parents {
            if child.is_seller() {
                return Err(NetError::SellerAsAgent);
            }
            if !parent.is_seller() && !parents.contains_key(&parent) {
                return Err(NetError::UnknownNode(parent));
            }
            children.entry(parent).or_default().push(child);
            children.entry(child).or_default();
        }
        for kids in children.values_mut() {
            kids.sort_unstable();
        }
        let mut level = BTreeMap::new();
        let mut stack = vec![(NodeId::SELLER, 0usize)];
        while let Some((node, depth)) = stack.pop() {
            for &c in &children[&node] {
                level.insert(c, depth + 1);
                stack.push((c, depth + 1));
            }
        }
        if level.len() != parents.len() {
            return Err(NetError::Cycle);
        }
        Ok(Self { parent: parents, children, level })
    }

    /// Tree induced by reported edges on a network whose seller-reachable
    /// part is already a tree.
    pub fn from_tree_network(net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Self, NetError> {
        if !net.is_seller_tree() {
            return Err(NetError::NotATree);
        }
        Ok(build_referral_tree(net, reports))
    }

    pub fn root(&self) -> NodeId {
        NodeId::SELLER
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.is_seller() || self.parent.contains_key(&id)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent.get(&id).copied()
    }

    /// Children in ascending id order.
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.children.get(&id).map_or(&[], Vec::as_slice)
    }

    /// Depth of a node; first-level agents have level 1.
    pub fn level(&self, id: NodeId) -> Option<usize> {
        if id.is_seller() {
            Some(0)
        } else {
            self.level.get(&id).copied()
        }
    }

    /// Agents in the tree, ascending id.
    pub fn agents(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.parent.keys().copied()
    }

    pub fn agent_set(&self) -> BTreeSet<NodeId> {
        self.parent.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Nodes of the subtree rooted at `id`, including `id`.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if !n.is_seller() {
                out.push(n);
            }
            stack.extend(self.children(n).iter().copied());
        }
        out
    }

    /// Maximum reported valuation over every subtree, computed in one
    /// post-order pass.
    pub fn subtree_maxima(&self, reports: &ReportProfile) -> BTreeMap<NodeId, f64> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![NodeId::SELLER];
        while let Some(n) = stack.pop() {
            order.push(n);
            stack.extend(self.children(n).iter().copied());
        }
        let mut best: BTreeMap<NodeId, f64> = BTreeMap::new();
        for &n in order.iter().rev() {
            if n.is_seller() {
                continue;
            }
            let own = reports.valuation(n);
            let m = self
                .children(n)
                .iter()
                .map(|c| best[c])
                .fold(own, f64::max);
            best.insert(n, m);
        }
        best
    }
}

/// First-invite-first-served referral tree over the agents reachable under
/// `reports`. The seller invites its neighbours first; afterwards the member
/// with the smallest `(timestamp, id)` hands out its pending invitations, so
/// the parent of an agent is its earliest-timestamped inviter.
pub fn build_referral_tree(net: &DiffusionNetwork, reports: &ReportProfile) -> ReferralTree {
    let reachable = filter_subnetwork(net, reports);
    let mut parents: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    // (timestamp + 1, id); the seller sorts first with key 0.
    let mut heap: BinaryHeap<Reverse<(u64, NodeId)>> = BinaryHeap::new();
    heap.push(Reverse((0, NodeId::SELLER)));
    while let Some(Reverse((_, k))) = heap.pop() {
        let invited: Box<dyn Iterator<Item = &NodeId>> = if k.is_seller() {
            Box::new(net.neighbors(k).iter())
        } else {
            match reports.get(k) {
                Some(r) => Box::new(r.neighbors.iter()),
                None => Box::new(std::iter::empty()),
            }
        };
        for &j in invited {
            if !reachable.contains(&j) || parents.contains_key(&j) {
                continue;
            }
            parents.insert(j, k);
            let ts = reports.get(j).map_or(u64::MAX - 1, |r| r.timestamp);
            heap.push(Reverse((ts.saturating_add(1), j)));
        }
    }
    ReferralTree::from_parents(parents).expect("first-invite assignment is acyclic")
}

/// Maximum reported valuation in the subtree rooted at `i`, including `i`.
pub fn subtree_max(tree: &ReferralTree, i: NodeId, reports: &ReportProfile) -> f64 {
    tree.subtree(i)
        .into_iter()
        .map(|n| reports.valuation(n))
        .fold(0.0, f64::max)
}
