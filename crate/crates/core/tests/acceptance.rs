//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are expected to fail and are reported as
//! such; the target exits non-zero only if a criterion changes state.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use diffusion_auctions::bayes::{
    appendix_identity, appendix_identity_with_breaks, check_mhr, estimate_interim, iid_priors, max_of_iid,
    paired_revenue, quadrature, Dist, Exponential, MaxViVa, ReserveSecondPrice, Uniform,
};
use diffusion_auctions::experiments::{parse_lambda_grid, sweep_lambda, ExperimentConfig};
use diffusion_auctions::mechanisms::fixtures::fig_lblev;
use diffusion_auctions::mechanisms::{
    rc_example_mechanism, rc_example_vipcs, run_idm_tree, run_lblev, run_referral_auction, ArgmaxPowered, ArgmaxRho,
    ExponentVector, Idm, Lblev, LevelRule, Mechanism, Rc3, ReferralAuction,
};
use diffusion_auctions::netcore::{
    build_referral_tree, DiffusionNetwork, NodeId, Outcome, ReferralTree, ReportProfile,
};
use diffusion_auctions::verify::{
    base_grid, diffusion_terms, mutant, random_exponents, random_network_instance, random_sibling_exponents,
    random_tree_instance, verify_conditions, AllocationProfile, Condition, VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criterion number and why it stays red.
const KNOWN_RED: &[(u32, &str)] = &[(
    3,
    "with one exponent drawn per agent, a forwarder below level 1 can raise its commission by hiding a child \
     whose large exponent makes it the level winner at a low price; LbLEV passes when siblings share an exponent",
)];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if took > limit {
        v.pass = false;
        v.detail.push_str(&format!("; took {took:.2?}, limit {limit:?}"));
    } else {
        v.detail.push_str(&format!("; {took:.2?}"));
    }
    v
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn c1_worked_example() -> Verdict {
    let fx = fig_lblev();
    let tree = ReferralTree::from_tree_network(&fx.instance.network, &fx.instance.reports).unwrap();
    let mut best = Duration::MAX;
    let mut out = None;
    for _ in 0..20 {
        let s = Instant::now();
        let r = run_lblev(&tree, &fx.instance.reports, &fx.exponents).unwrap();
        best = best.min(s.elapsed());
        out = Some(r.0);
    }
    let out = out.unwrap();
    let (a, e, k) = (fx.id("A"), fx.id("E"), fx.id("K"));
    let sqrt6 = 6f64.sqrt();
    let third = (16.0 - sqrt6).sqrt();
    let checks = [
        out.winner() == Some(k),
        close(out.seller_revenue, 729.0, 1e-6),
        close(out.payment_of(a), -sqrt6, 1e-6),
        close(out.payment_of(e), -third, 1e-6),
        close(out.payment_of(k), 729.0 + sqrt6 + third, 1e-6),
        close(729.0 + sqrt6, 731.45, 0.01),
        close(out.payment_of(k), 735.13, 0.01),
        close(-out.payment_of(a), 2.449, 1e-3),
        close(-out.payment_of(e), 3.681, 1e-3),
        best < Duration::from_millis(1),
    ];
    verdict(
        checks.iter().all(|&c| c),
        format!(
            "winner {:?}, revenue {}, K pays {:.6}, commissions {:.6} / {:.6}, best run {best:.2?}",
            fx.labels.get(&out.winner().unwrap_or(NodeId(0))),
            out.seller_revenue,
            out.payment_of(k),
            -out.payment_of(a),
            -out.payment_of(e)
        ),
    )
}

fn c2_rc_fixture() -> Verdict {
    let out = rc_example_mechanism(&[4.0, 6.0, 9.0]).unwrap();
    let pays: Vec<f64> = (1..=3).map(|i| out.payment_of(NodeId(i))).collect();
    let ids = [NodeId(1), NodeId(2), NodeId(3)];
    let vipcs = rc_example_vipcs(&[(ids[0], 4.0), (ids[1], 6.0), (ids[2], 9.0)]).unwrap();
    let exact = pays == [-2.0, 0.0, 2.0]
        && close(vipcs[0], -2.0, 1e-15)
        && close(vipcs[1], -4.0 / 3.0, 1e-15)
        && close(vipcs[2], -4.0 / 3.0, 1e-15);

    // r_A = 0: A competes with B = 6 and C = 9 under the 2/3-1/3 rule.
    let net = DiffusionNetwork::new(ids, ids.map(|i| (NodeId::SELLER, i))).unwrap();
    let grid = base_grid(64, 24.0, &[10.0]);
    let hidden = AllocationProfile::build(&grid, |v| {
        let reports =
            ReportProfile::truthful(&net, &BTreeMap::from([(ids[0], v), (ids[1], 6.0), (ids[2], 9.0)]));
        Rc3.run(&net, &reports).map(|o| (o.allocation_of(ids[0]), o.payment_of(ids[0])))
    })
    .unwrap();
    // r_A = 1: allocation 2/3 from v_A = 10 with VIPC -11/3, payments by the identity.
    let full = AllocationProfile::build(&grid, |v| {
        let g = if v >= 10.0 { 2.0 / 3.0 } else { 0.0 };
        Ok::<_, ()>((g, -11.0 / 3.0 + if v >= 10.0 { 20.0 / 3.0 } else { 0.0 }))
    })
    .unwrap();
    let mut diffusion_ok = true;
    let mut lhs_seen = f64::NAN;
    for i in 0..hidden.base_len() {
        let (lhs, rhs) = diffusion_terms(&hidden, &full, i);
        let v = hidden.base_point(i).v;
        lhs_seen = lhs;
        diffusion_ok &= close(lhs, 5.0 / 3.0, 1e-9) && lhs >= rhs - 1e-9;
        if v >= 10.0 {
            diffusion_ok &= close(rhs, 5.0 / 3.0, 1e-9);
        }
    }
    verdict(exact && diffusion_ok, format!("payments {pays:?}, VIPCs {vipcs:?}, LHS {lhs_seen}"))
}

const CHARACTERIZATION: [Condition; 5] =
    [Condition::Monotonicity, Condition::PaymentIdentity, Condition::DiffusionConstraint, Condition::Ddsic, Condition::Ir];

fn failing_instances(
    trials: u64,
    opts: &VerifyOptions,
    mech_for: impl Fn(&mut ChaCha8Rng, &diffusion_auctions::netcore::Instance) -> Box<dyn Mechanism>,
) -> BTreeMap<Condition, usize> {
    let mut fails: BTreeMap<Condition, usize> = CHARACTERIZATION.iter().map(|&c| (c, 0)).collect();
    for k in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + k);
        let n = rng.random_range(1..=12);
        let inst = random_tree_instance(&mut rng, n);
        let mech = mech_for(&mut rng, &inst);
        for r in verify_conditions(mech.as_ref(), &inst, &CHARACTERIZATION, opts).unwrap() {
            if !r.pass {
                *fails.get_mut(&r.condition).unwrap() += 1;
            }
        }
    }
    fails
}

/// Parent `P` with a weak bid forwards to a strong child and a cheap one.
fn no_offset_instance() -> diffusion_auctions::netcore::Instance {
    let (p, q, x, y) = (NodeId(1), NodeId(2), NodeId(3), NodeId(4));
    let net = DiffusionNetwork::new([p, q, x, y], [(NodeId::SELLER, p), (NodeId::SELLER, q), (p, x), (p, y)]).unwrap();
    let vals = BTreeMap::from([(p, 0.5), (q, 2.0), (x, 10.0), (y, 1.0)]);
    diffusion_auctions::netcore::Instance::truthful(net, &vals)
}

fn c3_characterization() -> Verdict {
    let opts = VerifyOptions { grid_size: 64, rel_tol: 1e-4, ..VerifyOptions::default() };
    let free = failing_instances(200, &opts, |rng, inst| {
        Box::new(Lblev::new(random_exponents(rng, &inst.network, 0.5, 3.0)))
    });
    let shared = failing_instances(200, &opts, |rng, inst| {
        Box::new(Lblev::new(random_sibling_exponents(rng, &inst.network, 0.5, 3.0)))
    });

    let designated = [
        (Condition::Monotonicity, "lowest-bidder"),
        (Condition::PaymentIdentity, "flat-fee"),
        (Condition::DiffusionConstraint, "greedy-no-commission"),
        (Condition::Ddsic, "branch-bonus"),
        (Condition::Ir, "loser-fee"),
    ];
    let fx = fig_lblev();
    let mut caught = Vec::new();
    for (cond, name) in designated {
        let m = mutant(name).unwrap();
        let r = verify_conditions(m.as_ref(), &fx.instance, &[cond], &opts).unwrap();
        caught.push(!r[0].pass);
    }
    let no_offset = mutant("no-offset").unwrap();
    let r = verify_conditions(no_offset.as_ref(), &no_offset_instance(), &[Condition::Ddsic], &opts).unwrap();
    caught.push(!r[0].pass);

    let free_ok = free.values().all(|&f| f == 0);
    let shared_ok = shared.values().all(|&f| f == 0);
    let mutants_ok = caught.iter().all(|&c| c);
    let fmt = |m: &BTreeMap<Condition, usize>| {
        m.iter().map(|(c, f)| format!("{c}={f}")).collect::<Vec<_>>().join(" ")
    };
    verdict(
        free_ok && mutants_ok,
        format!(
            "failing instances, per-agent exponents: {}; sibling-shared exponents: {}{}; mutants caught {}/{}",
            fmt(&free),
            fmt(&shared),
            if shared_ok { " (all pass)" } else { "" },
            caught.iter().filter(|&&c| c).count(),
            caught.len()
        ),
    )
}

fn same_outcome(a: &Outcome, b: &Outcome, tol: f64) -> bool {
    a.winner() == b.winner()
        && a.payments.keys().chain(b.payments.keys()).all(|&id| close(a.payment_of(id), b.payment_of(id), tol))
        && close(a.seller_revenue, b.seller_revenue, tol)
}

/// Textbook IDM on a tree: walk the critical path to the highest bidder;
/// the first node on it that outbids everyone outside the next subtree wins.
fn idm_oracle(tree: &ReferralTree, reports: &ReportProfile) -> (Option<NodeId>, BTreeMap<NodeId, f64>, f64) {
    fn sub_max(tree: &ReferralTree, r: &ReportProfile, i: NodeId) -> f64 {
        let mut best = r.valuation(i);
        let mut stack = tree.children(i).to_vec();
        while let Some(c) = stack.pop() {
            best = best.max(r.valuation(c));
            stack.extend_from_slice(tree.children(c));
        }
        best
    }
    let mut pay = BTreeMap::new();
    if tree.agents().all(|a| reports.valuation(a) <= 0.0) {
        return (None, pay, 0.0);
    }
    // Path from the seller: at each node descend into the child with the
    // largest subtree maximum, smaller id first on ties.
    let mut path = Vec::new();
    let mut cur = tree.root();
    loop {
        let mut kids: Vec<(NodeId, f64)> = tree.children(cur).iter().map(|&c| (c, sub_max(tree, reports, c))).collect();
        kids.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let Some(&(next, _)) = kids.first() else { break };
        path.push(next);
        cur = next;
    }
    // Critical price of path node k: the best bid outside its subtree.
    let outside = |k: NodeId| {
        tree.agents()
            .filter(|&a| !tree.subtree(k).contains(&a))
            .map(|a| reports.valuation(a))
            .fold(0.0, f64::max)
    };
    let mut winner = *path.last().unwrap();
    for w in path.windows(2) {
        if reports.valuation(w[0]) >= outside(w[1]) {
            winner = w[0];
            break;
        }
    }
    let upto = path.iter().position(|&p| p == winner).unwrap();
    for k in 0..=upto {
        let p = outside(path[k]);
        let received = if k < upto { outside(path[k + 1]) } else { 0.0 };
        pay.insert(path[k], p - received);
    }
    (Some(winner), pay, outside(path[0]))
}

fn c4_equivalences() -> Verdict {
    let mut idm_bad = 0;
    let mut ra_bad = 0;
    for k in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + k);
        let n = rng.random_range(1..=14);
        let inst = random_tree_instance(&mut rng, n);
        let tree = ReferralTree::from_tree_network(&inst.network, &inst.reports).unwrap();
        let ours = run_idm_tree(&tree, &inst.reports).unwrap();
        let unit = run_lblev(&tree, &inst.reports, &ExponentVector::unit()).unwrap().0;
        let (w, pay, rev) = idm_oracle(&tree, &inst.reports);
        let oracle_ok = ours.winner() == w
            && close(ours.seller_revenue, rev, 1e-9)
            && inst.network.agents().iter().all(|&a| close(ours.payment_of(a), pay.get(&a).copied().unwrap_or(0.0), 1e-9));
        if !(oracle_ok && same_outcome(&ours, &unit, 0.0)) {
            idm_bad += 1;
        }

        let net_inst = random_network_instance(&mut rng, n, 0.15);
        let t = random_exponents(&mut rng, &net_inst.network, 0.5, 3.0);
        let ra = run_referral_auction(&net_inst.network, &net_inst.reports, &ArgmaxPowered { exponents: t.clone() })
            .unwrap()
            .0;
        let tree = build_referral_tree(&net_inst.network, &net_inst.reports);
        let lb = run_lblev(&tree, &net_inst.reports, &t).unwrap().0;
        if !same_outcome(&ra, &lb, 1e-9) {
            ra_bad += 1;
        }
    }
    verdict(idm_bad == 0 && ra_bad == 0, format!("mismatches: IDM {idm_bad}/500, RA vs LbLEV {ra_bad}/500"))
}

/// First-level reduction: one star node per first-level subtree carrying its
/// maximum, auctioned with the same rule.
fn ta_oracle(net: &DiffusionNetwork, reports: &ReportProfile, rule: Arc<dyn LevelRule>) -> f64 {
    let tree = build_referral_tree(net, reports);
    let mut maxima = BTreeMap::new();
    for &c in tree.children(tree.root()) {
        let mut best = 0.0f64;
        let mut stack = vec![c];
        while let Some(x) = stack.pop() {
            best = best.max(reports.valuation(x));
            stack.extend_from_slice(tree.children(x));
        }
        maxima.insert(c, best);
    }
    let star = DiffusionNetwork::new(maxima.keys().copied(), maxima.keys().map(|&c| (NodeId::SELLER, c))).unwrap();
    let star_reports = ReportProfile::truthful(&star, &maxima);
    ReferralAuction { rule }.run(&star, &star_reports).unwrap().seller_revenue
}

fn c5_ta_revenue() -> Verdict {
    let mut bad = 0;
    for k in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + k);
        let n = rng.random_range(1..=15);
        let inst = random_network_instance(&mut rng, n, 0.2);
        let rule: Arc<dyn LevelRule> = if k % 2 == 0 {
            Arc::new(ArgmaxRho)
        } else {
            Arc::new(ArgmaxPowered { exponents: random_exponents(&mut rng, &inst.network, 0.5, 3.0) })
        };
        let ra = ReferralAuction { rule: rule.clone() }.run(&inst.network, &inst.reports).unwrap().seller_revenue;
        if ra != ta_oracle(&inst.network, &inst.reports, rule) {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("{bad}/200 instances differ"))
}

fn c6_maxviva() -> Verdict {
    let dist: Dist = Arc::new(Uniform::new(0.0, 1.0).unwrap());
    let (a, b) = (NodeId(1), NodeId(2));
    let net = DiffusionNetwork::new([a, b], [(NodeId::SELLER, a), (NodeId::SELLER, b)]).unwrap();
    let maxviva = MaxViVa::iid(dist.clone());

    // Oracle: revenue integrated over the unit square.
    let oracle = quadrature::integrate(
        |x| {
            quadrature::integrate(
                |y| {
                    let r = ReportProfile::truthful(&net, &BTreeMap::from([(a, x), (b, y)]));
                    maxviva.run(&net, &r).unwrap().seller_revenue
                },
                0.0,
                1.0,
                &[0.5, x],
                2,
            )
        },
        0.0,
        1.0,
        &[0.5],
        2,
    );

    let challengers: Vec<Box<dyn Mechanism>> = vec![
        Box::new(Idm),
        Box::new(ReserveSecondPrice { reserve: 0.25 }),
        Box::new(ReserveSecondPrice { reserve: 0.4 }),
        Box::new(ReserveSecondPrice { reserve: 0.6 }),
        Box::new(ReserveSecondPrice { reserve: 0.75 }),
        Box::new(Lblev::new(ExponentVector::new(BTreeMap::from([(a, 1.0), (b, 2.0)])).unwrap())),
        Box::new(Lblev::new(ExponentVector::new(BTreeMap::from([(a, 0.5), (b, 1.0)])).unwrap())),
    ];
    let mut mechs: Vec<&dyn Mechanism> = vec![&maxviva];
    mechs.extend(challengers.iter().map(|m| m.as_ref()));
    let res = paired_revenue(&mechs, &net, &iid_priors(&net, &dist), 1_000_000, 42).unwrap();
    let est = &res.estimates[0];
    let target = 5.0 / 12.0;
    let mc_ok = (est.mean - target).abs() <= 3.0 * est.stderr;
    let beats = res.lead_over.iter().all(|(_, d, se)| *d >= -3.0 * se);
    let worst = res.lead_over.iter().map(|(_, d, se)| d / se.max(1e-300)).fold(f64::INFINITY, f64::min);
    verdict(
        mc_ok && beats && close(oracle, target, 1e-9),
        format!(
            "MC {:.6} +- {:.6}, quadrature {oracle:.9}, target {target:.6}; smallest lead {worst:.1} SE",
            est.mean, est.stderr
        ),
    )
}

fn c7_mhr() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    let bases: [(&str, Dist); 2] =
        [("uniform", Arc::new(Uniform::new(0.0, 1.0).unwrap())), ("exp", Arc::new(Exponential::new(1.0).unwrap()))];
    for (name, base) in bases {
        for n in [2, 3, 5] {
            let d = max_of_iid(base.clone(), n).unwrap();
            let rep = check_mhr(d.as_ref(), 256);
            ok &= rep.is_mhr && rep.grid.len() >= 255;
            detail.push(format!("{name}^{n}:{}", if rep.is_mhr { "mhr" } else { "not" }));
        }
    }
    let m2 = max_of_iid(Arc::new(Uniform::new(0.0, 1.0).unwrap()), 2).unwrap();
    let cdf_ok = (0..=1000).all(|k| {
        let x = k as f64 / 1000.0;
        close(m2.cdf(x), x * x, 1e-12)
    });
    verdict(ok && cdf_ok, format!("{}; max-of-2 cdf = x^2: {cdf_ok}", detail.join(" ")))
}

fn c8_identity() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    let dists: [Dist; 2] = [Arc::new(Uniform::new(0.0, 1.0).unwrap()), Arc::new(Exponential::new(1.0).unwrap())];
    for d in dists {
        let plain = appendix_identity(&Idm, &d).unwrap();
        let reserve = ReserveSecondPrice { reserve: 0.5 };
        let with_reserve = appendix_identity_with_breaks(&reserve, &d, &[0.5]).unwrap();
        for (mech, s) in [(Idm.name(), plain), (reserve.name(), with_reserve)] {
            let rel = (s.payment - s.virtual_surplus).abs() / s.payment.abs().max(1e-12);
            ok &= rel <= 1e-4;
            detail.push(format!("{}/{mech}: {:.6} vs {:.6}", d.name(), s.payment, s.virtual_surplus));
        }
    }
    verdict(ok, detail.join(", "))
}

fn c9_experiment() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let config = ExperimentConfig::new(10, 5.0, parse_lambda_grid("0:1:0.05").unwrap(), 50, 50, 42);
    let table = pool.install(|| sweep_lambda(&config)).unwrap();
    let zero = &table.rows[0];
    let zero_ok = zero.lambda == 0.0 && zero.mean_pct == 0.0 && zero.stderr == 0.0;
    let best = table
        .rows
        .iter()
        .filter(|r| r.lambda > 0.0)
        .max_by(|a, b| (a.mean_pct - 2.0 * a.stderr).total_cmp(&(b.mean_pct - 2.0 * b.stderr)))
        .unwrap();
    let positive = best.mean_pct - 2.0 * best.stderr > 0.0;
    let star = table.rows.iter().find(|r| r.lambda == table.lambda_star).unwrap();
    let interior = table.lambda_star > 0.0 && table.lambda_star < 1.0;
    verdict(
        zero_ok && positive,
        format!(
            "lambda=0 row {} +- {}; lambda* = {} ({:.3}% +- {:.3}, {}); {} draws, {} skipped",
            zero.mean_pct,
            zero.stderr,
            table.lambda_star,
            star.mean_pct,
            star.stderr,
            if interior { "interior" } else { "boundary" },
            table.draws,
            table.excluded
        ),
    )
}

fn c10_interim_monotone() -> Verdict {
    // s -> 1 -> {2, 3}, s -> 4 -> 5; the agent under test is 2.
    let ids: Vec<NodeId> = (1..=5).map(NodeId).collect();
    let net = DiffusionNetwork::new(
        ids.clone(),
        [(NodeId::SELLER, ids[0]), (ids[0], ids[1]), (ids[0], ids[2]), (NodeId::SELLER, ids[3]), (ids[3], ids[4])],
    )
    .unwrap();
    let t = ExponentVector::new(BTreeMap::from([(ids[0], 1.5), (ids[3], 1.0), (ids[1], 2.0), (ids[2], 2.0), (ids[4], 0.8)]))
        .unwrap();
    let mech = Lblev::new(t);
    let prior: Dist = Arc::new(Uniform::new(0.0, 100.0).unwrap());
    let priors = iid_priors(&net, &prior);
    let grid: Vec<f64> = (0..16).map(|k| 100.0 * k as f64 / 15.0).collect();
    let est: Vec<_> =
        grid.iter().map(|&v| estimate_interim(&mech, &net, &priors, ids[1], v, 100_000, 77).unwrap()).collect();
    let mut ok = true;
    for w in est.windows(2) {
        let se = (w[0].allocation_se.powi(2) + w[1].allocation_se.powi(2)).sqrt();
        ok &= w[1].allocation >= w[0].allocation - 3.0 * se;
    }
    let curve: Vec<String> = est.iter().step_by(5).map(|e| format!("{:.3}", e.allocation)).collect();
    verdict(ok, format!("alpha at v = 0, 33, 67, 100: {}", curve.join(" ")))
}

fn main() {
    let criteria: Vec<(u32, &str, Duration, fn() -> Verdict)> = vec![
        (1, "LbLEV worked example", Duration::from_secs(5), c1_worked_example),
        (2, "randomized three-bidder fixture", Duration::from_secs(5), c2_rc_fixture),
        (3, "characterization suite", Duration::from_secs(120), c3_characterization),
        (4, "IDM and RA equivalences", Duration::from_secs(60), c4_equivalences),
        (5, "first-level revenue equivalence", Duration::from_secs(60), c5_ta_revenue),
        (6, "maxViVa optimality", Duration::from_secs(60), c6_maxviva),
        (7, "max of i.i.d. keeps MHR", Duration::from_secs(10), c7_mhr),
        (8, "payment / virtual surplus identity", Duration::from_secs(30), c8_identity),
        (9, "lambda sweep", Duration::from_secs(300), c9_experiment),
        (10, "interim allocation monotone", Duration::from_secs(120), c10_interim_monotone),
    ];
    let mut surprises = 0;
    for (num, name, limit, f) in criteria {
        let v = timed(limit, f);
        let known = KNOWN_RED.iter().find(|(k, _)| *k == num);
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {num:>2} {status} {name}: {}", v.detail);
        match (v.pass, known) {
            (false, Some((_, why))) => println!("              known red: {why}"),
            (true, Some(_)) => {
                println!("              listed as known red but passed");
                surprises += 1;
            }
            (false, None) => surprises += 1,
            (true, None) => {}
        }
    }
    if surprises > 0 {
        eprintln!("{surprises} criteria changed state");
        std::process::exit(1);
    }
}
