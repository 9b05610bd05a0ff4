use super::exponents::{powered, ExponentVector};
use super::level::{run_levels, LevelPolicy, LevelTrace};
use super::rules::{myerson_level_payment, LevelRule};
use super::MechanismError;
use crate::netcore::{build_referral_tree, DiffusionNetwork, NodeId, Outcome, ReferralTree, ReportProfile};

struct LblevPolicy<'a> {
    t: &'a ExponentVector,
}

impl LevelPolicy for LblevPolicy<'_> {
    fn decide(
        &self,
        _level: usize,
        candidates: &[(NodeId, f64)],
    ) -> Result<Option<(NodeId, f64)>, MechanismError> {
        let mut ranked: Vec<(NodeId, f64, f64)> = candidates
            .iter()
            .map(|&(id, rho)| (id, rho, powered(rho, self.t.get(id))))
            .collect();
        ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        let (star, _, _) = ranked[0];
        let z = match ranked.get(1) {
            Some(&(runner, rho, _)) => powered(rho, self.t.get(runner) / self.t.get(star)),
            None => 0.0,
        };
        Ok(Some((star, z)))
    }
}

/// Level-by-level exponential valuation mechanism on a referral tree.
pub fn run_lblev(
    tree: &ReferralTree,
    reports: &ReportProfile,
    t: &ExponentVector,
) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
    run_levels(tree, reports, &LblevPolicy { t })
}

/// IDM restricted to trees: LbLEV with every exponent equal to one.
pub fn run_idm_tree(tree: &ReferralTree, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
    run_lblev(tree, reports, &ExponentVector::unit()).map(|(o, _)| o)
}

pub(crate) struct RulePolicy<'a> {
    pub rule: &'a dyn LevelRule,
}

impl LevelPolicy for RulePolicy<'_> {
    fn decide(
        &self,
        _level: usize,
        candidates: &[(NodeId, f64)],
    ) -> Result<Option<(NodeId, f64)>, MechanismError> {
        if candidates.len() == 1 {
            return Ok(Some((candidates[0].0, 0.0)));
        }
        let star = self.rule.select(candidates);
        let z = myerson_level_payment(self.rule, star, candidates)?;
        Ok(Some((star, z)))
    }
}

/// Referral auction: first-invite-first-served referral tree, then the level
/// loop with `rule` and its threshold payments.
pub fn run_referral_auction(
    net: &DiffusionNetwork,
    reports: &ReportProfile,
    rule: &dyn LevelRule,
) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
    let tree = build_referral_tree(net, reports);
    run_referral_on_tree(&tree, reports, rule)
}

pub fn run_referral_on_tree(
    tree: &ReferralTree,
    reports: &ReportProfile,
    rule: &dyn LevelRule,
) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
    run_levels(tree, reports, &RulePolicy { rule })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::mechanisms::fixtures::fig_lblev;
    use crate::mechanisms::rules::{ArgmaxPowered, ArgmaxRho};

    const TOL: f64 = 1e-6;

    #[test]
    fn fig_lblev_trace() {
        let fx = fig_lblev();
        let tree = ReferralTree::from_tree_network(&fx.instance.network, &fx.instance.reports).unwrap();
        let (out, trace) = run_lblev(&tree, &fx.instance.reports, &fx.exponents).unwrap();
        let (a, e, k) = (fx.id("A"), fx.id("E"), fx.id("K"));
        assert_eq!(out.winner(), Some(k));
        assert_eq!(trace.len(), 3);
        let pay_a = 729.0;
        let pay_e = 729.0 + 6f64.sqrt();
        let pay_k = pay_e + (745.0 - pay_e).sqrt();
        assert!((trace[0].actual_payment - pay_a).abs() < TOL);
        assert!((trace[1].actual_payment - pay_e).abs() < TOL);
        assert!((trace[2].actual_payment - pay_k).abs() < TOL);
        assert!((out.seller_revenue - 729.0).abs() < TOL);
        assert!((-out.payment_of(a) - (pay_e - pay_a)).abs() < TOL);
        assert!((-out.payment_of(e) - (pay_k - pay_e)).abs() < TOL);
        assert!((out.payment_of(k) - pay_k).abs() < TOL);
        assert!((out.total_payments() - out.seller_revenue).abs() < 1e-9);
    }

    #[test]
    fn unit_exponents_give_second_price_at_level_one() {
        let fx = fig_lblev();
        let tree = ReferralTree::from_tree_network(&fx.instance.network, &fx.instance.reports).unwrap();
        let out = run_idm_tree(&tree, &fx.instance.reports).unwrap();
        assert!((out.seller_revenue - 9.0).abs() < 1e-12);
        let w = out.winner().unwrap();
        assert!(tree.subtree(fx.id("A")).contains(&w));
    }

    #[test]
    fn single_agent_wins_for_free() {
        let net = DiffusionNetwork::new([NodeId(1)], [(NodeId(0), NodeId(1))]).unwrap();
        let reports = ReportProfile::truthful(&net, &BTreeMap::from([(NodeId(1), 5.0)]));
        let tree = ReferralTree::from_tree_network(&net, &reports).unwrap();
        let (out, _) = run_lblev(&tree, &reports, &ExponentVector::unit()).unwrap();
        assert_eq!(out.winner(), Some(NodeId(1)));
        assert_eq!(out.payment_of(NodeId(1)), 0.0);
    }

    #[test]
    fn all_zero_is_unsold() {
        let fx = fig_lblev();
        let mut reports = fx.instance.reports.clone();
        for id in fx.instance.network.agents().clone() {
            reports.set_valuation(id, 0.0);
        }
        let tree = ReferralTree::from_tree_network(&fx.instance.network, &reports).unwrap();
        let (out, trace) = run_lblev(&tree, &reports, &fx.exponents).unwrap();
        assert!(!out.is_sold());
        assert!(trace.is_empty());
        assert!(out.payments.values().all(|&p| p == 0.0));
    }

    #[test]
    fn depth_one_second_price() {
        let net = DiffusionNetwork::new(
            [NodeId(1), NodeId(2)],
            [(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2))],
        )
        .unwrap();
        let reports = ReportProfile::truthful(&net, &BTreeMap::from([(NodeId(1), 10.0), (NodeId(2), 7.0)]));
        let tree = ReferralTree::from_tree_network(&net, &reports).unwrap();
        let out = run_idm_tree(&tree, &reports).unwrap();
        assert_eq!(out.winner(), Some(NodeId(1)));
        assert_eq!(out.payment_of(NodeId(1)), 7.0);
    }

    #[test]
    fn referral_auction_matches_lblev_on_fixture() {
        let fx = fig_lblev();
        let net = &fx.instance.network;
        let reports = &fx.instance.reports;
        let tree = ReferralTree::from_tree_network(net, reports).unwrap();
        let (lb, _) = run_lblev(&tree, reports, &fx.exponents).unwrap();
        let rule = ArgmaxPowered::new(fx.exponents.clone());
        let (ra, _) = run_referral_auction(net, reports, &rule).unwrap();
        assert_eq!(lb.winner(), ra.winner());
        for (id, p) in &lb.payments {
            assert!((p - ra.payment_of(*id)).abs() < 1e-9, "{id}");
        }
        let idm = run_idm_tree(&tree, reports).unwrap();
        let (ra1, _) = run_referral_auction(net, reports, &ArgmaxRho).unwrap();
        assert_eq!(idm.winner(), ra1.winner());
        assert!((idm.seller_revenue - ra1.seller_revenue).abs() < 1e-9);
    }
}
