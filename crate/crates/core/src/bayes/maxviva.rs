//! Revenue-optimal level-1 auction for i.i.d. MHR priors, and the reserve
//! second-price challengers it is compared against.

use std::collections::BTreeMap;

use super::distributions::{max_of_iid, Dist};
use super::virtual_value::{invert_between, require_mhr, virtual_or_floor};
use super::BayesError;
use crate::mechanisms::{
    run_levels, ArgmaxRho, LevelPolicy, LevelTrace, Mechanism, MechanismError, RulePolicy,
};
use crate::netcore::{build_referral_tree, DiffusionNetwork, NodeId, Outcome, ReferralTree, ReportProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelDecision {
    pub winner: Option<NodeId>,
    pub payment: f64,
}

/// Highest non-negative virtual valuation wins and pays
/// `max(w^-1(0), w^-1(best rival virtual valuation))` under its own prior.
pub fn maxviva_level(nodes: &[(NodeId, f64, &Dist)]) -> Result<LevelDecision, BayesError> {
    for (_, _, d) in nodes {
        require_mhr(d.as_ref())?;
    }
    let w: Vec<f64> = nodes.iter().map(|(_, v, d)| virtual_or_floor(d.as_ref(), *v)).collect();
    let mut best: Option<usize> = None;
    for (i, &wi) in w.iter().enumerate() {
        if wi < 0.0 {
            continue;
        }
        best = match best {
            Some(b) if w[b] > wi || (w[b] == wi && nodes[b].0 < nodes[i].0) => Some(b),
            _ => Some(i),
        };
    }
    let Some(l) = best else {
        return Ok(LevelDecision { winner: None, payment: 0.0 });
    };
    let (id, v, d) = nodes[l];
    let lo = d.lower();
    let reserve = invert_between(d.as_ref(), 0.0, lo, v);
    let rival = w.iter().enumerate().filter(|&(k, _)| k != l).map(|(_, &x)| x).fold(f64::NEG_INFINITY, f64::max);
    let matching = if rival.is_finite() { invert_between(d.as_ref(), rival, lo, v) } else { lo };
    Ok(LevelDecision { winner: Some(id), payment: reserve.max(matching) })
}

/// Prior of every first-level subtree's maximum.
#[derive(Debug, Clone)]
pub enum FirstLevelPriors {
    /// Agents i.i.d.; each subtree gets the max over its size.
    Iid(Dist),
    PerNode(BTreeMap<NodeId, Dist>),
}

impl FirstLevelPriors {
    fn for_tree(&self, tree: &ReferralTree) -> Result<BTreeMap<NodeId, Dist>, BayesError> {
        let kids = tree.children(tree.root());
        match self {
            FirstLevelPriors::Iid(base) => kids
                .iter()
                .map(|&c| Ok((c, max_of_iid(base.clone(), tree.subtree(c).len())?)))
                .collect(),
            FirstLevelPriors::PerNode(map) => kids
                .iter()
                .map(|&c| map.get(&c).cloned().map(|d| (c, d)).ok_or(BayesError::MissingPrior(c)))
                .collect(),
        }
    }
}

struct MaxVivaPolicy {
    priors: BTreeMap<NodeId, Dist>,
}

impl LevelPolicy for MaxVivaPolicy {
    fn decide(
        &self,
        level: usize,
        candidates: &[(NodeId, f64)],
    ) -> Result<Option<(NodeId, f64)>, MechanismError> {
        if level > 1 {
            return RulePolicy { rule: &ArgmaxRho }.decide(level, candidates);
        }
        let nodes: Vec<(NodeId, f64, &Dist)> = candidates
            .iter()
            .map(|&(id, rho)| {
                self.priors
                    .get(&id)
                    .map(|d| (id, rho, d))
                    .ok_or_else(|| MechanismError::from(BayesError::MissingPrior(id)))
            })
            .collect::<Result<_, _>>()?;
        let d = maxviva_level(&nodes)?;
        Ok(d.winner.map(|w| (w, d.payment)))
    }
}

pub fn run_maxviva(
    net: &DiffusionNetwork,
    reports: &ReportProfile,
    priors: &FirstLevelPriors,
) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
    let tree = build_referral_tree(net, reports);
    let policy = MaxVivaPolicy { priors: priors.for_tree(&tree)? };
    run_levels(&tree, reports, &policy)
}

#[derive(Debug, Clone)]
pub struct MaxViVa {
    pub priors: FirstLevelPriors,
}

impl MaxViVa {
    pub fn iid(base: Dist) -> Self {
        Self { priors: FirstLevelPriors::Iid(base) }
    }
}

impl Mechanism for MaxViVa {
    fn name(&self) -> String {
        "maxviva".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        run_maxviva(net, reports, &self.priors).map(|(o, _)| o)
    }

    fn run_traced(
        &self,
        net: &DiffusionNetwork,
        reports: &ReportProfile,
    ) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
        run_maxviva(net, reports, &self.priors)
    }
}

struct ReservePolicy {
    reserve: f64,
}

impl LevelPolicy for ReservePolicy {
    fn decide(
        &self,
        level: usize,
        candidates: &[(NodeId, f64)],
    ) -> Result<Option<(NodeId, f64)>, MechanismError> {
        if level > 1 {
            return RulePolicy { rule: &ArgmaxRho }.decide(level, candidates);
        }
        let mut live: Vec<(NodeId, f64)> =
            candidates.iter().copied().filter(|&(_, rho)| rho >= self.reserve).collect();
        live.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(live.first().map(|&(w, _)| {
            let second = live.get(1).map_or(0.0, |x| x.1);
            (w, second.max(self.reserve))
        }))
    }
}

/// Second price at level 1 with a reserve, argmax below.
#[derive(Debug, Clone, Copy)]
pub struct ReserveSecondPrice {
    pub reserve: f64,
}

impl Mechanism for ReserveSecondPrice {
    fn name(&self) -> String {
        format!("second-price:{}", self.reserve)
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        let tree = build_referral_tree(net, reports);
        run_levels(&tree, reports, &ReservePolicy { reserve: self.reserve }).map(|(o, _)| o)
    }
}
