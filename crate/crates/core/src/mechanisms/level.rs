//! The level-by-level descent shared by LbLEV, referral auctions and maxViVa.

use std::collections::BTreeMap;

use serde::Serialize;

use super::MechanismError;
use crate::netcore::{NodeId, Outcome, ReferralTree, ReportProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelTrace {
    pub level: usize,
    pub parent: NodeId,
    pub offset: f64,
    /// Children that survived the `rho >= 0` filter, with their `rho`.
    pub candidates: Vec<(NodeId, f64)>,
    pub tentative_winner: NodeId,
    /// Level component `z`.
    pub effective_payment: f64,
    /// `offset + z`, paid by the tentative winner to `parent`.
    pub actual_payment: f64,
}

/// Picks a level's tentative winner and its level payment `z`.
pub(crate) trait LevelPolicy {
    /// `candidates` is non-empty, sorted by id, each with `rho >= 0`.
    /// `None` ends the descent: at level 1 the item is unsold, deeper down
    /// the parent keeps it.
    fn decide(
        &self,
        level: usize,
        candidates: &[(NodeId, f64)],
    ) -> Result<Option<(NodeId, f64)>, MechanismError>;
}

pub(crate) fn run_levels(
    tree: &ReferralTree,
    reports: &ReportProfile,
    policy: &dyn LevelPolicy,
) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
    let everyone: Vec<NodeId> = reports.iter().map(|(id, _)| id).chain(tree.agents()).collect();
    let mut outcome = Outcome::unsold(everyone);
    if tree.agents().all(|a| reports.valuation(a) <= 0.0) {
        return Ok((outcome, Vec::new()));
    }

    let maxima = tree.subtree_maxima(reports);
    let mut paid: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut received: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut trace = Vec::new();

    let mut parent = tree.root();
    let mut offset = 0.0;
    let mut level = 1;
    let winner = loop {
        let candidates: Vec<(NodeId, f64)> = tree
            .children(parent)
            .iter()
            .map(|&c| (c, maxima[&c] - offset))
            .filter(|&(_, rho)| rho >= 0.0)
            .collect();
        if candidates.is_empty() {
            break (!parent.is_seller()).then_some(parent);
        }
        let Some((star, z)) = policy.decide(level, &candidates)? else {
            break (!parent.is_seller()).then_some(parent);
        };
        // The seller never keeps the item once a level-1 candidate exists.
        if !parent.is_seller() && reports.valuation(parent) >= offset + z {
            break Some(parent);
        }
        let actual = offset + z;
        paid.insert(star, actual);
        *received.entry(parent).or_insert(0.0) += actual;
        trace.push(LevelTrace {
            level,
            parent,
            offset,
            candidates,
            tentative_winner: star,
            effective_payment: z,
            actual_payment: actual,
        });
        parent = star;
        offset = actual;
        level += 1;
    };

    let Some(winner) = winner else {
        return Ok((outcome, trace));
    };
    outcome.allocation.insert(winner, 1.0);
    for (&id, &p) in &paid {
        let r = received.get(&id).copied().unwrap_or(0.0);
        outcome.payments.insert(id, p - r);
    }
    outcome.seller_revenue = received.get(&tree.root()).copied().unwrap_or(0.0);
    Ok((outcome, trace))
}
