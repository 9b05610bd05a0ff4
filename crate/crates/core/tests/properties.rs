use std::collections::BTreeMap;
use std::sync::Arc;

use diffusion_auctions::bayes::{Dist, MaxViVa, Uniform};
use diffusion_auctions::mechanisms::{
    myerson_level_payment, run_lblev, ArgmaxRho, ExponentVector, LevelRule, Mechanism, ReferralAuction,
};
use diffusion_auctions::netcore::{
    build_referral_tree, filter_subnetwork, DiffusionNetwork, NodeId, ReferralTree, ReportProfile,
};
use proptest::prelude::*;

/// Parent indices `p[i] < i + 1` give a tree over agents `1..=n`.
fn tree_strategy(max: usize) -> impl Strategy<Value = (Vec<u32>, Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| {
        let parents = (0..n).map(|i| 0..=i as u32).collect::<Vec<_>>();
        let vals = prop::collection::vec(prop_oneof![1 => Just(0.0), 6 => 0.0..100.0f64], n);
        let exps = prop::collection::vec(0.5..3.0f64, n);
        (parents, vals, exps)
    })
}

fn build(parents: &[u32], vals: &[f64]) -> (DiffusionNetwork, ReportProfile) {
    let n = parents.len() as u32;
    let edges: Vec<(NodeId, NodeId)> = parents.iter().enumerate().map(|(i, &p)| (NodeId(p), NodeId(i as u32 + 1))).collect();
    let net = DiffusionNetwork::new((1..=n).map(NodeId), edges).unwrap();
    let v: BTreeMap<NodeId, f64> = vals.iter().enumerate().map(|(i, &x)| (NodeId(i as u32 + 1), x)).collect();
    let reports = ReportProfile::truthful(&net, &v);
    (net, reports)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lblev_outcomes_are_sane((parents, vals, exps) in tree_strategy(12)) {
        let (net, reports) = build(&parents, &vals);
        let t = ExponentVector::new(exps.iter().enumerate().map(|(i, &x)| (NodeId(i as u32 + 1), x)).collect()).unwrap();
        let tree = ReferralTree::from_tree_network(&net, &reports).unwrap();
        let (out, trace) = run_lblev(&tree, &reports, &t).unwrap();
        prop_assert!(out.is_feasible());
        // Money only moves along the path: agents' net payments sum to the seller's take.
        prop_assert!((out.total_payments() - out.seller_revenue).abs() < 1e-9);
        prop_assert!(out.seller_revenue >= 0.0);
        // Truthful reporting is individually rational.
        for (id, r) in reports.iter() {
            prop_assert!(out.utility(id, r.valuation) >= -1e-9, "agent {id}");
        }
        match out.winner() {
            Some(w) => {
                let path: Vec<NodeId> = trace.iter().map(|l| l.tentative_winner).collect();
                prop_assert!(path.contains(&w));
                for (id, _) in reports.iter() {
                    if !path.contains(&id) {
                        prop_assert_eq!(out.payment_of(id), 0.0);
                    }
                }
                // Offsets never decrease down the path.
                prop_assert!(trace.windows(2).all(|l| l[1].offset >= l[0].offset));
            }
            None => prop_assert!(vals.iter().all(|&v| v <= 0.0)),
        }
        prop_assert_eq!(run_lblev(&tree, &reports, &t).unwrap().0, out);
    }

    #[test]
    fn referral_tree_spans_the_reachable_set(
        (parents, vals, _) in tree_strategy(10),
        extra in prop::collection::vec((1u32..=10, 1u32..=10), 0..8),
    ) {
        let (tree_net, _) = build(&parents, &vals);
        let n = parents.len() as u32;
        let mut edges: Vec<(NodeId, NodeId)> = tree_net.edges().collect();
        edges.extend(extra.into_iter().filter(|&(a, b)| a != b && a <= n && b <= n).map(|(a, b)| (NodeId(a), NodeId(b))));
        let net = DiffusionNetwork::new((1..=n).map(NodeId), edges).unwrap();
        let v: BTreeMap<NodeId, f64> = vals.iter().enumerate().map(|(i, &x)| (NodeId(i as u32 + 1), x)).collect();
        let reports = ReportProfile::truthful(&net, &v);
        let tree = build_referral_tree(&net, &reports);
        prop_assert_eq!(tree.agent_set(), filter_subnetwork(&net, &reports));
        let out = ReferralAuction::new(ArgmaxRho).run(&net, &reports).unwrap();
        prop_assert!(out.is_feasible());
        prop_assert!((out.total_payments() - out.seller_revenue).abs() < 1e-9);
    }

    #[test]
    fn argmax_level_payment_is_second_highest(rhos in prop::collection::vec(0.0..50.0f64, 2..6)) {
        let cands: Vec<(NodeId, f64)> = rhos.iter().enumerate().map(|(i, &r)| (NodeId(i as u32 + 1), r)).collect();
        let w = ArgmaxRho.select(&cands);
        let mut sorted = rhos.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let z = myerson_level_payment(&ArgmaxRho, w, &cands).unwrap();
        prop_assert!((z - sorted[1]).abs() < 1e-9 * sorted[0].max(1.0), "{z} vs {}", sorted[1]);
    }

    #[test]
    fn maxviva_respects_the_reserve(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let dist: Dist = Arc::new(Uniform::new(0.0, 1.0).unwrap());
        let (x, y) = (NodeId(1), NodeId(2));
        let net = DiffusionNetwork::new([x, y], [(NodeId::SELLER, x), (NodeId::SELLER, y)]).unwrap();
        let reports = ReportProfile::truthful(&net, &BTreeMap::from([(x, a), (y, b)]));
        let out = MaxViVa::iid(dist).run(&net, &reports).unwrap();
        if a.max(b) < 0.5 {
            prop_assert!(!out.is_sold());
        } else {
            let expect = a.min(b).max(0.5);
            prop_assert!((out.seller_revenue - expect).abs() < 1e-9);
        }
    }
}
