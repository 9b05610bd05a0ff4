//! Deliberately broken mechanisms. Each one violates a specific condition,
//! so a verifier that passes them has a blind spot.

use crate::mechanisms::{
    run_idm_tree, run_referral_on_tree, ArgmaxRho, Mechanism, MechanismError,
};
use crate::netcore::{
    build_referral_tree, filter_subnetwork, DiffusionNetwork, NodeId, Outcome, ReferralTree, ReportProfile,
};

pub const MUTANT_NAMES: [&str; 6] =
    ["lowest-bidder", "flat-fee", "greedy-no-commission", "no-offset", "loser-fee", "branch-bonus"];

pub fn mutant(name: &str) -> Option<Box<dyn Mechanism>> {
    Some(match name {
        "lowest-bidder" => Box::new(LowestBidder),
        "flat-fee" => Box::new(FlatFee { fee: 1.0 }),
        "greedy-no-commission" => Box::new(GreedyNoCommission),
        "no-offset" => Box::new(NoOffset),
        "loser-fee" => Box::new(LoserFee { fee: 1.0 }),
        "branch-bonus" => Box::new(BranchBonus),
        _ => return None,
    })
}

fn reachable_bids(net: &DiffusionNetwork, reports: &ReportProfile) -> Vec<(NodeId, f64)> {
    filter_subnetwork(net, reports).into_iter().map(|id| (id, reports.valuation(id))).collect()
}

/// Lowest reachable bid wins for free. Breaks monotonicity.
pub struct LowestBidder;

impl Mechanism for LowestBidder {
    fn name(&self) -> String {
        "mutant:lowest-bidder".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let mut out = Outcome::unsold(net.agents().iter().copied());
        let bids = reachable_bids(net, reports);
        if let Some(&(w, _)) = bids.iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))) {
            out.allocation.insert(w, 1.0);
        }
        Ok(out)
    }
}

/// IDM allocation but the winner pays a constant. Breaks the payment identity.
pub struct FlatFee {
    pub fee: f64,
}

impl Mechanism for FlatFee {
    fn name(&self) -> String {
        "mutant:flat-fee".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let tree = ReferralTree::from_tree_network(net, reports)?;
        let idm = run_idm_tree(&tree, reports)?;
        let mut out = Outcome::unsold(net.agents().iter().copied());
        if let Some(w) = idm.winner() {
            out.allocation.insert(w, 1.0);
            out.payments.insert(w, self.fee);
            out.seller_revenue = self.fee;
        }
        Ok(out)
    }
}

/// Second-price auction over everyone reachable. Forwarders earn nothing,
/// which breaks the diffusion constraint.
pub struct GreedyNoCommission;

impl Mechanism for GreedyNoCommission {
    fn name(&self) -> String {
        "mutant:greedy-no-commission".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let mut out = Outcome::unsold(net.agents().iter().copied());
        let mut bids = reachable_bids(net, reports);
        bids.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        if let Some(&(w, v)) = bids.first() {
            if v > 0.0 {
                let price = bids.get(1).map_or(0.0, |b| b.1);
                out.allocation.insert(w, 1.0);
                out.payments.insert(w, price);
                out.seller_revenue = price;
            }
        }
        Ok(out)
    }
}

/// Level-by-level second price on raw subtree maxima, without passing the
/// offset down. Parents can profit from cutting off a valuable subtree.
pub struct NoOffset;

impl Mechanism for NoOffset {
    fn name(&self) -> String {
        "mutant:no-offset".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let tree = ReferralTree::from_tree_network(net, reports)?;
        let mut out = Outcome::unsold(net.agents().iter().copied());
        if tree.agents().all(|a| reports.valuation(a) <= 0.0) {
            return Ok(out);
        }
        let maxima = tree.subtree_maxima(reports);
        let mut parent = tree.root();
        let winner = loop {
            let mut kids: Vec<(NodeId, f64)> = tree.children(parent).iter().map(|&c| (c, maxima[&c])).collect();
            if kids.is_empty() {
                break parent;
            }
            kids.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let z = kids.get(1).map_or(0.0, |k| k.1);
            if !parent.is_seller() && reports.valuation(parent) >= z {
                break parent;
            }
            let star = kids[0].0;
            *out.payments.entry(star).or_insert(0.0) += z;
            if parent.is_seller() {
                out.seller_revenue = z;
            } else {
                *out.payments.entry(parent).or_insert(0.0) -= z;
            }
            parent = star;
        };
        out.allocation.insert(winner, 1.0);
        Ok(out)
    }
}

/// IDM where every reachable non-winner also pays a fee. Breaks IR.
pub struct LoserFee {
    pub fee: f64,
}

impl Mechanism for LoserFee {
    fn name(&self) -> String {
        "mutant:loser-fee".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let tree = ReferralTree::from_tree_network(net, reports)?;
        let mut out = run_idm_tree(&tree, reports)?;
        if let Some(w) = out.winner() {
            for id in tree.agent_set() {
                if id != w {
                    *out.payments.entry(id).or_insert(0.0) += self.fee;
                    out.seller_revenue += self.fee;
                }
            }
        }
        Ok(out)
    }
}

/// Referral auction whose on-path commissions are diverted to the losing
/// first-level branches. A forwarder on the winning path prefers to hide
/// its neighbours and win itself.
pub struct BranchBonus;

impl Mechanism for BranchBonus {
    fn name(&self) -> String {
        "mutant:branch-bonus".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let tree = build_referral_tree(net, reports);
        let (mut out, trace) = run_referral_on_tree(&tree, reports, &ArgmaxRho)?;
        let Some(winner) = out.winner() else {
            return Ok(out);
        };
        let mut pool = 0.0;
        for step in &trace {
            let id = step.tentative_winner;
            if id != winner {
                pool -= out.payment_of(id);
                out.payments.insert(id, 0.0);
            }
        }
        let top = trace.first().map(|s| s.tentative_winner);
        let others: Vec<NodeId> = tree.children(tree.root()).iter().copied().filter(|&c| Some(c) != top).collect();
        if others.is_empty() {
            out.seller_revenue += pool;
        } else {
            let share = pool / others.len() as f64;
            for c in others {
                *out.payments.entry(c).or_insert(0.0) -= share;
            }
        }
        Ok(out)
    }
}
