//! Graph and tree substrate: agents, reports, reachability filtering and
//! referral-tree construction.

mod file;
mod network;
mod outcome;
mod tree;

use thiserror::Error;

pub use file::{AgentRecord, InstanceFile};
pub use network::{
    filter_subnetwork, AgentType, DiffusionNetwork, Instance, NodeId, Report, ReportProfile,
};
pub use outcome::Outcome;
pub use tree::{build_referral_tree, subtree_max, ReferralTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("the seller cannot be listed as an agent")]
    SellerAsAgent,
    #[error("agent {0} listed twice")]
    DuplicateAgent(NodeId),
    #[error("edge from {0} targets the seller")]
    EdgeIntoSeller(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self loop at {0}")]
    SelfLoop(NodeId),
    #[error("no report for agent {0}")]
    MissingReport(NodeId),
    #[error("agent {0} has invalid valuation {1}")]
    BadValuation(NodeId, f64),
    #[error("agent {agent} reports {neighbor}, which is not a true neighbour")]
    ReportedNonNeighbor { agent: NodeId, neighbor: NodeId },
    #[error("the seller-reachable network is not a rooted tree")]
    NotATree,
    #[error("parent assignment contains a cycle")]
    Cycle,
}
