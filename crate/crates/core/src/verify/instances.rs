//! Random instances for property tests and the `gen` command.

use std::collections::BTreeMap;

use rand::Rng;

use crate::mechanisms::ExponentVector;
use crate::netcore::{DiffusionNetwork, Instance, NodeId};

/// Random recursive tree: agent `i` hangs under a uniformly chosen earlier
/// node, the seller included.
pub fn random_tree_network<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DiffusionNetwork {
    let agents: Vec<NodeId> = (1..=n as u32).map(NodeId).collect();
    let edges: Vec<(NodeId, NodeId)> =
        agents.iter().map(|&a| (NodeId(rng.random_range(0..a.0)), a)).collect();
    DiffusionNetwork::new(agents, edges).expect("recursive trees are valid")
}

/// A random tree plus extra edges between agents, each present with
/// probability `extra`, so some agents have several inviters.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, n: usize, extra: f64) -> DiffusionNetwork {
    let tree = random_tree_network(rng, n);
    let mut edges: Vec<(NodeId, NodeId)> = tree.edges().collect();
    for i in 1..=n as u32 {
        for j in 1..=n as u32 {
            if i != j && !tree.neighbors(NodeId(i)).contains(&NodeId(j)) && rng.random_bool(extra) {
                edges.push((NodeId(i), NodeId(j)));
            }
        }
    }
    DiffusionNetwork::new(tree.agents().iter().copied(), edges).expect("agent edges are valid")
}

/// Valuations uniform on `[0, hi)`, with a few exact zeros mixed in.
pub fn random_valuations<R: Rng + ?Sized>(
    rng: &mut R,
    net: &DiffusionNetwork,
    hi: f64,
) -> BTreeMap<NodeId, f64> {
    net.agents()
        .iter()
        .map(|&a| (a, if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..hi) }))
        .collect()
}

pub fn random_tree_instance<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Instance {
    let net = random_tree_network(rng, n);
    let vals = random_valuations(rng, &net, 100.0);
    Instance::truthful(net, &vals)
}

pub fn random_network_instance<R: Rng + ?Sized>(rng: &mut R, n: usize, extra: f64) -> Instance {
    let net = random_network(rng, n, extra);
    let vals = random_valuations(rng, &net, 100.0);
    Instance::truthful(net, &vals)
}

pub fn random_exponents<R: Rng + ?Sized>(
    rng: &mut R,
    net: &DiffusionNetwork,
    lo: f64,
    hi: f64,
) -> ExponentVector {
    let map = net.agents().iter().map(|&a| (a, rng.random_range(lo..=hi))).collect();
    ExponentVector::new(map).expect("range is positive")
}

/// Exponents that are independent across first-level agents but shared by
/// all children of any agent. Defined on tree networks, where the children
/// of a node are its out-neighbours.
pub fn random_sibling_exponents<R: Rng + ?Sized>(
    rng: &mut R,
    net: &DiffusionNetwork,
    lo: f64,
    hi: f64,
) -> ExponentVector {
    let mut map = BTreeMap::new();
    for &c in net.neighbors(NodeId::SELLER) {
        map.insert(c, rng.random_range(lo..=hi));
    }
    for &a in net.agents() {
        let t = rng.random_range(lo..=hi);
        for &c in net.neighbors(a) {
            map.insert(c, t);
        }
    }
    ExponentVector::new(map).expect("range is positive")
}
