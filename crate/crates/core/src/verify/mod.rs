//! Grid-based verification of truthfulness conditions for diffusion
//! mechanisms: monotone allocations, the payment identity, the diffusion
//! constraint on value-independent payments, direct deviation search,
//! individual rationality and first-level revenue equivalence.
//!
//! Each agent is examined against every tested subset of its true
//! neighbours. For a subset the mechanism is evaluated on a valuation grid
//! and bisected around allocation jumps; every check then reads off the
//! resulting profiles.

mod checks;
pub mod instances;
pub mod mutants;
mod profile;

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::mechanisms::{LevelRule, Mechanism, MechanismError};
use crate::netcore::{filter_subnetwork, DiffusionNetwork, Instance, NodeId, ReportProfile};

pub use checks::{check_ta_equivalence, diffusion_terms, ta_revenue};
pub use instances::{
    random_exponents, random_network, random_network_instance, random_sibling_exponents, random_tree_instance,
    random_tree_network,
    random_valuations,
};
pub use mutants::{mutant, MUTANT_NAMES};
pub use profile::{base_grid, AllocationProfile, ProfilePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Monotonicity,
    PaymentIdentity,
    DiffusionConstraint,
    Ddsic,
    Ic,
    Ir,
    Misreport,
    TaEquivalence,
}

impl Condition {
    pub const MECHANISM_CHECKS: [Condition; 7] = [
        Condition::Monotonicity,
        Condition::PaymentIdentity,
        Condition::DiffusionConstraint,
        Condition::Ddsic,
        Condition::Ic,
        Condition::Ir,
        Condition::Misreport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Monotonicity => "monotonicity",
            Condition::PaymentIdentity => "payment-identity",
            Condition::DiffusionConstraint => "diffusion-constraint",
            Condition::Ddsic => "ddsic",
            Condition::Ic => "ic",
            Condition::Ir => "ir",
            Condition::Misreport => "misreport",
            Condition::TaEquivalence => "ta-equivalence",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A reported type of the agent under test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub valuation: f64,
    pub neighbors: BTreeSet<NodeId>,
}

/// Reproducing input for a failed condition. Others' reports are those of
/// the verified instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub condition: Condition,
    pub agent: NodeId,
    pub true_valuation: f64,
    pub baseline: Deviation,
    pub deviation: Deviation,
    /// Size of the violation; positive means violated.
    pub gap: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub condition: Condition,
    pub pass: bool,
    /// Neighbour subsets were sampled rather than enumerated for some agent.
    pub probabilistic: bool,
    pub comparisons: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "pass" } else { "FAIL" };
        write!(f, "{:<22} {status} ({} comparisons", self.condition.as_str(), self.comparisons)?;
        if self.probabilistic {
            write!(f, ", sampled subsets")?;
        }
        write!(f, ")")?;
        if let Some(w) = &self.witness {
            write!(
                f,
                "\n  agent {} (v = {}): {}. gap {:.3e}",
                w.agent, w.true_valuation, w.detail, w.gap
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Uniform grid points on `[0, 2 * v_max]`.
    pub grid_size: usize,
    /// Absolute tolerance for inequalities.
    pub eps: f64,
    /// Relative tolerance for the payment identity.
    pub rel_tol: f64,
    /// Full powerset enumeration up to this out-degree.
    pub max_enumerated_degree: usize,
    pub sampled_subsets: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid_size: 64,
            eps: 1e-6,
            rel_tol: 1e-4,
            max_enumerated_degree: 12,
            sampled_subsets: 256,
            seed: 42,
        }
    }
}

/// Valuation points and neighbour subsets tested for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationGrid {
    pub points: Vec<f64>,
    /// Always contains the empty and the full set; the full set comes first.
    pub subsets: Vec<BTreeSet<NodeId>>,
    pub probabilistic: bool,
}

impl DeviationGrid {
    pub fn for_agent(instance: &Instance, agent: NodeId, opts: &VerifyOptions) -> Self {
        let v_true = instance.reports.valuation(agent);
        let upper = 2.0 * instance.max_valuation().max(0.5);
        let points = base_grid(opts.grid_size, upper, &[v_true]);
        let nbrs: Vec<NodeId> = instance.network.neighbors(agent).iter().copied().collect();
        let full: BTreeSet<NodeId> = nbrs.iter().copied().collect();
        let mut subsets = vec![full.clone()];
        let probabilistic = nbrs.len() > opts.max_enumerated_degree;
        if !probabilistic {
            for mask in 0u64..(1u64 << nbrs.len()) {
                if mask == (1u64 << nbrs.len()) - 1 {
                    continue;
                }
                subsets.push(
                    nbrs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &j)| j).collect(),
                );
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (u64::from(agent.0) << 32));
            let mut seen: BTreeSet<BTreeSet<NodeId>> = BTreeSet::new();
            seen.insert(full.clone());
            seen.insert(BTreeSet::new());
            subsets.push(BTreeSet::new());
            let mut tries = 0;
            while subsets.len() < opts.sampled_subsets && tries < 16 * opts.sampled_subsets {
                tries += 1;
                let s: BTreeSet<NodeId> = nbrs.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
                if seen.insert(s.clone()) {
                    subsets.push(s);
                }
            }
        }
        Self { points, subsets, probabilistic }
    }
}

/// All profiles of one agent, one per tested subset (index 0 = full set).
pub(crate) struct AgentProfiles {
    pub agent: NodeId,
    pub v_true: f64,
    pub true_idx: usize,
    pub subsets: Vec<BTreeSet<NodeId>>,
    pub profiles: Vec<AllocationProfile>,
    pub probabilistic: bool,
}

pub(crate) fn evaluate(
    mech: &dyn Mechanism,
    net: &DiffusionNetwork,
    reports: &ReportProfile,
    agent: NodeId,
    v: f64,
    neighbors: &BTreeSet<NodeId>,
) -> Result<(f64, f64), MechanismError> {
    let out = mech.run(net, &reports.with_report(agent, v, neighbors.clone()))?;
    Ok((out.allocation_of(agent), out.payment_of(agent)))
}

fn agent_profiles(
    mech: &dyn Mechanism,
    instance: &Instance,
    agent: NodeId,
    opts: &VerifyOptions,
) -> Result<AgentProfiles, MechanismError> {
    let grid = DeviationGrid::for_agent(instance, agent, opts);
    let v_true = instance.reports.valuation(agent);
    let true_idx = grid.points.iter().position(|&v| v == v_true).expect("grid holds the true value");
    let profiles = grid
        .subsets
        .iter()
        .map(|s| {
            AllocationProfile::build(&grid.points, |v| {
                evaluate(mech, &instance.network, &instance.reports, agent, v, s)
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AgentProfiles {
        agent,
        v_true,
        true_idx,
        subsets: grid.subsets,
        profiles,
        probabilistic: grid.probabilistic,
    })
}

/// Agents whose reachability does not depend on their own report.
fn tested_agents(instance: &Instance) -> Vec<NodeId> {
    filter_subnetwork(&instance.network, &instance.reports).into_iter().collect()
}

fn collect_profiles(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<Vec<AgentProfiles>, MechanismError> {
    tested_agents(instance)
        .par_iter()
        .map(|&a| agent_profiles(mech, instance, a, opts))
        .collect()
}

fn report_for(condition: Condition, all: &[AgentProfiles], opts: &VerifyOptions) -> VerificationReport {
    let mut comparisons = 0;
    let mut witness: Option<Witness> = None;
    for ap in all {
        let found = checks::run_check(condition, ap, opts);
        comparisons += found.comparisons;
        if let Some(w) = found.witness {
            if witness.as_ref().is_none_or(|best| w.gap > best.gap) {
                witness = Some(w);
            }
        }
    }
    VerificationReport {
        condition,
        pass: witness.is_none(),
        probabilistic: all.iter().any(|ap| ap.probabilistic),
        comparisons,
        witness,
    }
}

/// Runs every mechanism-level condition from one set of profiles. With a
/// `rule`, also checks first-level revenue equivalence of the referral
/// auction using it.
pub fn verify_all(
    mech: &dyn Mechanism,
    instance: &Instance,
    rule: Option<&dyn LevelRule>,
    opts: &VerifyOptions,
) -> Result<Vec<VerificationReport>, MechanismError> {
    let all = collect_profiles(mech, instance, opts)?;
    let mut reports: Vec<VerificationReport> =
        Condition::MECHANISM_CHECKS.iter().map(|&c| report_for(c, &all, opts)).collect();
    if let Some(rule) = rule {
        reports.push(check_ta_equivalence(&instance.network, &instance.reports, rule)?);
    }
    Ok(reports)
}

/// Like [`verify_all`] restricted to `conditions`, sharing one set of profiles.
pub fn verify_conditions(
    mech: &dyn Mechanism,
    instance: &Instance,
    conditions: &[Condition],
    opts: &VerifyOptions,
) -> Result<Vec<VerificationReport>, MechanismError> {
    let all = collect_profiles(mech, instance, opts)?;
    Ok(conditions.iter().filter(|c| **c != Condition::TaEquivalence).map(|&c| report_for(c, &all, opts)).collect())
}

fn single(
    condition: Condition,
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    let all = collect_profiles(mech, instance, opts)?;
    Ok(report_for(condition, &all, opts))
}

pub fn check_allocation_monotonicity(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::Monotonicity, mech, instance, opts)
}

pub fn check_payment_identity(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::PaymentIdentity, mech, instance, opts)
}

pub fn check_diffusion_constraint(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::DiffusionConstraint, mech, instance, opts)
}

pub fn check_ddsic_deviations(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::Ddsic, mech, instance, opts)
}

pub fn check_ic(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::Ic, mech, instance, opts)
}

pub fn check_neighbor_misreport(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::Misreport, mech, instance, opts)
}

/// Truthful utilities of all agents, plus full-forwarding utilities at every
/// grid value of each agent's own valuation.
pub fn check_ir(
    mech: &dyn Mechanism,
    instance: &Instance,
    opts: &VerifyOptions,
) -> Result<VerificationReport, MechanismError> {
    single(Condition::Ir, mech, instance, opts)
}

/// Outcome of replaying a witness on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replay {
    pub gap: f64,
    pub violated: bool,
}

/// Recomputes a witness's violation from scratch, without the profiles that
/// produced it.
pub fn replay(
    mech: &dyn Mechanism,
    instance: &Instance,
    w: &Witness,
    opts: &VerifyOptions,
) -> Result<Replay, MechanismError> {
    let net = &instance.network;
    let reports = &instance.reports;
    let run = |d: &Deviation| evaluate(mech, net, reports, w.agent, d.valuation, &d.neighbors);
    let utility = |d: &Deviation| run(d).map(|(g, p)| w.true_valuation * g - p);
    let (gap, violated) = match w.condition {
        Condition::Monotonicity => {
            let gap = run(&w.baseline)?.0 - run(&w.deviation)?.0;
            (gap, gap > opts.eps)
        }
        Condition::PaymentIdentity => {
            let v = w.deviation.valuation;
            let grid = base_grid(opts.grid_size, v, &[]);
            let prof = AllocationProfile::build(&grid, |y| {
                evaluate(mech, net, reports, w.agent, y, &w.deviation.neighbors)
            })?;
            let pt = prof.at(v).expect("grid ends at v");
            let resid = (pt.p - (prof.vipc() + v * pt.g - pt.integral)).abs();
            (resid, resid > opts.rel_tol * pt.p.abs().max(1.0))
        }
        Condition::DiffusionConstraint => {
            let v = w.deviation.valuation;
            let grid = base_grid(opts.grid_size, v, &[]);
            let build = |s: &BTreeSet<NodeId>| {
                AllocationProfile::build(&grid, |y| evaluate(mech, net, reports, w.agent, y, s))
            };
            let full = build(&w.baseline.neighbors)?;
            let hat = build(&w.deviation.neighbors)?;
            let (lhs, rhs) = diffusion_terms(&hat, &full, grid.len() - 1);
            (rhs - lhs, rhs - lhs > opts.eps)
        }
        Condition::Ddsic | Condition::Ic | Condition::Misreport => {
            let gap = utility(&w.deviation)? - utility(&w.baseline)?;
            (gap, gap > opts.eps)
        }
        Condition::Ir => {
            let gap = -utility(&w.baseline)?;
            (gap, gap > opts.eps)
        }
        Condition::TaEquivalence => {
            return Err(MechanismError::BadInput(
                "revenue-equivalence witnesses are replayed with check_ta_equivalence".into(),
            ))
        }
    };
    Ok(Replay { gap, violated })
}

/// True if every report passed.
pub fn all_pass(reports: &[VerificationReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
