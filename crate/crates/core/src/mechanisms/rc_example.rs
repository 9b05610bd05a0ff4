//! Three-bidder randomized residual-claimant mechanism: the highest bid gets
//! the item with probability 2/3, the second highest with 1/3. Payments follow
//! the payment identity with value-independent component
//! `-(1/3) * (second highest bid among the others)`, which redistributes the
//! winner's `(1/3) * second bid` among the non-winners.

use super::{Mechanism, MechanismError};
use crate::netcore::{filter_subnetwork, DiffusionNetwork, NodeId, Outcome, ReportProfile};

const SHARE_TOP: f64 = 2.0 / 3.0;
const SHARE_SECOND: f64 = 1.0 / 3.0;

fn beats(a: (NodeId, f64), b: (NodeId, f64)) -> bool {
    a.1 > b.1 || (a.1 == b.1 && a.0 < b.0)
}

/// Value-independent payment components, in the order of `bids`.
pub fn rc_example_vipcs(bids: &[(NodeId, f64)]) -> Result<Vec<f64>, MechanismError> {
    check_three(bids)?;
    Ok((0..3)
        .map(|i| {
            let others: Vec<f64> = (0..3).filter(|&j| j != i).map(|j| bids[j].1).collect();
            -SHARE_SECOND * others[0].min(others[1])
        })
        .collect())
}

fn check_three(bids: &[(NodeId, f64)]) -> Result<(), MechanismError> {
    if bids.len() != 3 {
        return Err(MechanismError::BadInput(format!("expected 3 bids, got {}", bids.len())));
    }
    if let Some(&(id, v)) = bids.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
        return Err(MechanismError::BadInput(format!("bid {v} of {id} is not a valuation")));
    }
    Ok(())
}

/// Runs the mechanism on `(id, bid)` pairs.
pub fn rc_example_on(bids: &[(NodeId, f64)]) -> Result<Outcome, MechanismError> {
    check_three(bids)?;
    if bids.iter().all(|&(_, v)| v == 0.0) {
        return Ok(Outcome::unsold(bids.iter().map(|&(id, _)| id)));
    }
    let vipc = rc_example_vipcs(bids)?;
    let mut out = Outcome::unsold(bids.iter().map(|&(id, _)| id));
    for i in 0..3 {
        let mut others: Vec<(NodeId, f64)> = (0..3).filter(|&j| j != i).map(|j| bids[j]).collect();
        others.sort_by(|a, b| if beats(*a, *b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
        let (hi, lo) = (others[0], others[1]);
        let me = bids[i];
        let mut g = 0.0;
        let mut p = vipc[i];
        if beats(me, lo) {
            g += SHARE_SECOND;
            p += SHARE_SECOND * lo.1;
        }
        if beats(me, hi) {
            g += SHARE_TOP - SHARE_SECOND;
            p += (SHARE_TOP - SHARE_SECOND) * hi.1;
        }
        out.allocation.insert(me.0, g);
        out.payments.insert(me.0, p);
    }
    out.seller_revenue = out.total_payments();
    Ok(out)
}

/// Bids in agent order `1, 2, 3`.
pub fn rc_example_mechanism(bids: &[f64]) -> Result<Outcome, MechanismError> {
    let tagged: Vec<(NodeId, f64)> =
        bids.iter().enumerate().map(|(i, &v)| (NodeId(i as u32 + 1), v)).collect();
    rc_example_on(&tagged)
}

/// Network wrapper: the reachable set must contain exactly three agents.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rc3;

impl Mechanism for Rc3 {
    fn name(&self) -> String {
        "rc3".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let reachable = filter_subnetwork(net, reports);
        let bids: Vec<(NodeId, f64)> = reachable.iter().map(|&id| (id, reports.valuation(id))).collect();
        let inner = rc_example_on(&bids)?;
        let mut out = Outcome::unsold(net.agents().iter().copied());
        out.allocation.extend(inner.allocation);
        out.payments.extend(inner.payments);
        out.seller_revenue = inner.seller_revenue;
        Ok(out)
    }
}
