use super::{AgentProfiles, AllocationProfile, Condition, Deviation, VerificationReport, VerifyOptions, Witness};
use crate::mechanisms::{myerson_level_payment, run_referral_auction, LevelRule, MechanismError};
use crate::netcore::{build_referral_tree, DiffusionNetwork, NodeId, ReferralTree, ReportProfile};

pub(crate) struct Finding {
    pub comparisons: usize,
    pub witness: Option<Witness>,
}

struct Tracker<'a> {
    ap: &'a AgentProfiles,
    condition: Condition,
    comparisons: usize,
    worst: Option<Witness>,
}

impl<'a> Tracker<'a> {
    fn new(ap: &'a AgentProfiles, condition: Condition) -> Self {
        Self { ap, condition, comparisons: 0, worst: None }
    }

    #[allow(clippy::too_many_arguments)]
    fn observe(
        &mut self,
        gap: f64,
        limit: f64,
        truth: f64,
        base: (f64, usize),
        dev: (f64, usize),
        detail: impl FnOnce() -> String,
    ) {
        self.comparisons += 1;
        if gap > limit && self.worst.as_ref().is_none_or(|w| gap > w.gap) {
            self.worst = Some(Witness {
                condition: self.condition,
                agent: self.ap.agent,
                true_valuation: truth,
                baseline: Deviation { valuation: base.0, neighbors: self.ap.subsets[base.1].clone() },
                deviation: Deviation { valuation: dev.0, neighbors: self.ap.subsets[dev.1].clone() },
                gap,
                detail: detail(),
            });
        }
    }

    fn finish(self) -> Finding {
        Finding { comparisons: self.comparisons, witness: self.worst }
    }
}

/// `(LHS, RHS)` of the diffusion constraint at base grid index `i`:
/// `p(0, r_hat) - p(0, r)` and `integral_0^v [g(y, r_hat) - g(y, r)] dy`.
pub fn diffusion_terms(hat: &AllocationProfile, full: &AllocationProfile, i: usize) -> (f64, f64) {
    let lhs = hat.vipc() - full.vipc();
    let rhs = hat.base_point(i).integral - full.base_point(i).integral;
    (lhs, rhs)
}

pub(crate) fn run_check(condition: Condition, ap: &AgentProfiles, opts: &VerifyOptions) -> Finding {
    let mut t = Tracker::new(ap, condition);
    let eps = opts.eps;
    let full = &ap.profiles[0];
    match condition {
        Condition::Monotonicity => {
            for (s, prof) in ap.profiles.iter().enumerate() {
                let mut peak = prof.points()[0];
                for pt in prof.points() {
                    t.observe(peak.g - pt.g, eps, ap.v_true, (peak.v, s), (pt.v, s), || {
                        format!("allocation drops from {} at {} to {} at {}", peak.g, peak.v, pt.g, pt.v)
                    });
                    if pt.g > peak.g {
                        peak = *pt;
                    }
                }
            }
        }
        Condition::PaymentIdentity => {
            for (s, prof) in ap.profiles.iter().enumerate() {
                let p0 = prof.vipc();
                for pt in prof.points() {
                    let formula = p0 + pt.v * pt.g - pt.integral;
                    let resid = (pt.p - formula).abs();
                    let limit = opts.rel_tol * pt.p.abs().max(1.0);
                    t.observe(resid, limit, ap.v_true, (0.0, s), (pt.v, s), || {
                        format!("payment {} but identity gives {}", pt.p, formula)
                    });
                }
            }
        }
        Condition::DiffusionConstraint => {
            for (s, hat) in ap.profiles.iter().enumerate().skip(1) {
                for i in 0..hat.base_len() {
                    let (lhs, rhs) = diffusion_terms(hat, full, i);
                    let v = hat.base_point(i).v;
                    t.observe(rhs - lhs, eps, v, (v, 0), (v, s), || {
                        format!("VIPC difference {lhs} below allocation-integral difference {rhs}")
                    });
                }
            }
        }
        Condition::Ddsic => {
            // Point 1: truthful valuation at any fixed neighbour report.
            for (s, prof) in ap.profiles.iter().enumerate() {
                let pts = prof.points();
                for a in pts {
                    let honest = a.v * a.g - a.p;
                    for b in pts {
                        let gain = a.v * b.g - b.p - honest;
                        t.observe(gain, eps, a.v, (a.v, s), (b.v, s), || {
                            format!("reporting {} instead of {} gains {gain}", b.v, a.v)
                        });
                    }
                }
            }
            // Point 2: full forwarding at the truthful valuation.
            for (s, hat) in ap.profiles.iter().enumerate().skip(1) {
                for i in 0..hat.base_len() {
                    let (f, h) = (full.base_point(i), hat.base_point(i));
                    let gain = (h.v * h.g - h.p) - (f.v * f.g - f.p);
                    t.observe(gain, eps, f.v, (f.v, 0), (h.v, s), || {
                        format!("withholding neighbours gains {gain}")
                    });
                }
            }
        }
        Condition::Ic => {
            for i in 0..full.base_len() {
                let f = full.base_point(i);
                let honest = f.v * f.g - f.p;
                for (s, prof) in ap.profiles.iter().enumerate() {
                    for j in 0..prof.base_len() {
                        let d = prof.base_point(j);
                        let gain = f.v * d.g - d.p - honest;
                        t.observe(gain, eps, f.v, (f.v, 0), (d.v, s), || {
                            format!("joint deviation to {} gains {gain}", d.v)
                        });
                    }
                }
            }
        }
        Condition::Ir => {
            for i in 0..full.base_len() {
                let f = full.base_point(i);
                let u = f.v * f.g - f.p;
                t.observe(-u, eps, f.v, (f.v, 0), (f.v, 0), || format!("truthful utility {u}"));
            }
        }
        Condition::Misreport => {
            let f = full.base_point(ap.true_idx);
            let honest = f.v * f.g - f.p;
            for (s, hat) in ap.profiles.iter().enumerate().skip(1) {
                let h = hat.base_point(ap.true_idx);
                let gain = h.v * h.g - h.p - honest;
                t.observe(gain, eps, ap.v_true, (ap.v_true, 0), (ap.v_true, s), || {
                    format!("reporting a strict neighbour subset gains {gain}")
                });
            }
        }
        Condition::TaEquivalence => {}
    }
    t.finish()
}

/// Subtree maxima by an explicit walk from each first-level node, kept apart
/// from the post-order pass the mechanisms use.
fn first_level_maxima(tree: &ReferralTree, reports: &ReportProfile) -> Vec<(NodeId, f64)> {
    tree.children(tree.root())
        .iter()
        .map(|&c| {
            let mut best = reports.valuation(c);
            let mut stack = vec![c];
            while let Some(k) = stack.pop() {
                best = best.max(reports.valuation(k));
                stack.extend_from_slice(tree.children(k));
            }
            (c, best)
        })
        .collect()
}

/// Revenue of the transformed auction: one level, each first-level subtree
/// replaced by a node holding its maximum.
pub fn ta_revenue(
    net: &DiffusionNetwork,
    reports: &ReportProfile,
    rule: &dyn LevelRule,
) -> Result<f64, MechanismError> {
    let tree = build_referral_tree(net, reports);
    if tree.agents().all(|a| reports.valuation(a) <= 0.0) {
        return Ok(0.0);
    }
    let nodes = first_level_maxima(&tree, reports);
    if nodes.len() < 2 {
        return Ok(0.0);
    }
    let winner = rule.select(&nodes);
    myerson_level_payment(rule, winner, &nodes)
}

pub fn check_ta_equivalence(
    net: &DiffusionNetwork,
    reports: &ReportProfile,
    rule: &dyn LevelRule,
) -> Result<VerificationReport, MechanismError> {
    let (out, _) = run_referral_auction(net, reports, rule)?;
    let ta = ta_revenue(net, reports, rule)?;
    let gap = (out.seller_revenue - ta).abs();
    let pass = out.seller_revenue == ta;
    let witness = (!pass).then(|| Witness {
        condition: Condition::TaEquivalence,
        agent: NodeId::SELLER,
        true_valuation: 0.0,
        baseline: Deviation { valuation: out.seller_revenue, neighbors: Default::default() },
        deviation: Deviation { valuation: ta, neighbors: Default::default() },
        gap,
        detail: format!("referral revenue {} vs transformed {}", out.seller_revenue, ta),
    });
    Ok(VerificationReport {
        condition: Condition::TaEquivalence,
        pass,
        probabilistic: false,
        comparisons: 1,
        witness,
    })
}
