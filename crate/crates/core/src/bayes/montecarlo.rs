//! Seeded Monte Carlo estimators. Trial `k` draws from its own ChaCha stream,
//! so results do not depend on thread count, and every mechanism in a
//! comparison sees the same valuation draws.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::distributions::Dist;
use crate::mechanisms::{Mechanism, MechanismError};
use crate::netcore::{DiffusionNetwork, NodeId, ReportProfile};

pub type AgentPriors = BTreeMap<NodeId, Dist>;

pub fn iid_priors(net: &DiffusionNetwork, dist: &Dist) -> AgentPriors {
    net.agents().iter().map(|&a| (a, dist.clone())).collect()
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One valuation per agent, drawn in ascending id order.
pub fn sample_valuations(priors: &AgentPriors, rng: &mut ChaCha8Rng) -> BTreeMap<NodeId, f64> {
    priors.iter().map(|(&id, d)| (id, d.sample(rng))).collect()
}

const BLOCK: u64 = 1024;

/// Per-component `(sum, sum of squares)` of `f(trial)` over `0..trials`,
/// folded in trial order within blocks and in block order across them.
fn moments(
    trials: u64,
    width: usize,
    f: impl Fn(u64) -> Result<Vec<f64>, MechanismError> + Sync,
) -> Result<Vec<(f64, f64)>, MechanismError> {
    let blocks: Vec<Vec<(f64, f64)>> = (0..trials.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![(0.0, 0.0); width];
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                for (slot, x) in acc.iter_mut().zip(f(t)?) {
                    slot.0 += x;
                    slot.1 += x * x;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, MechanismError>>()?;
    let mut total = vec![(0.0, 0.0); width];
    for block in blocks {
        for (t, b) in total.iter_mut().zip(block) {
            t.0 += b.0;
            t.1 += b.1;
        }
    }
    Ok(total)
}

/// Mean and standard error from raw moments.
pub fn mean_stderr(sum: f64, sumsq: f64, n: u64) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevenueEstimate {
    pub mechanism: String,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRevenue {
    pub estimates: Vec<RevenueEstimate>,
    /// Mean and standard error of `R_first - R_k` for each later mechanism.
    pub lead_over: Vec<(String, f64, f64)>,
}

pub fn expected_revenue(
    mech: &dyn Mechanism,
    net: &DiffusionNetwork,
    priors: &AgentPriors,
    trials: u64,
    seed: u64,
) -> Result<RevenueEstimate, MechanismError> {
    Ok(paired_revenue(&[mech], net, priors, trials, seed)?.estimates.remove(0))
}

/// Revenues of several mechanisms on common valuation draws.
pub fn paired_revenue(
    mechs: &[&dyn Mechanism],
    net: &DiffusionNetwork,
    priors: &AgentPriors,
    trials: u64,
    seed: u64,
) -> Result<PairedRevenue, MechanismError> {
    let k = mechs.len();
    let m = moments(trials, 2 * k - 1, |t| {
        let vals = sample_valuations(priors, &mut trial_rng(seed, t));
        let reports = ReportProfile::truthful(net, &vals);
        let revs = mechs
            .iter()
            .map(|m| m.run(net, &reports).map(|o| o.seller_revenue))
            .collect::<Result<Vec<f64>, _>>()?;
        let mut row = revs.clone();
        row.extend(revs[1..].iter().map(|r| revs[0] - r));
        Ok(row)
    })?;
    let estimates = mechs
        .iter()
        .zip(&m[..k])
        .map(|(mech, &(s, q))| {
            let (mean, stderr) = mean_stderr(s, q, trials);
            RevenueEstimate { mechanism: mech.name(), trials, mean, stderr }
        })
        .collect();
    let lead_over = mechs[1..]
        .iter()
        .zip(&m[k..])
        .map(|(mech, &(s, q))| {
            let (mean, se) = mean_stderr(s, q, trials);
            (mech.name(), mean, se)
        })
        .collect();
    Ok(PairedRevenue { estimates, lead_over })
}

/// Interim expected allocation and payment of one agent at a fixed value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InterimEstimate {
    pub agent: NodeId,
    pub valuation: f64,
    pub allocation: f64,
    pub payment: f64,
    pub samples: u64,
    pub allocation_se: f64,
    pub payment_se: f64,
}

/// Averages over others' valuations with `agent` pinned at `v`. Everyone
/// forwards truthfully. The same `seed` gives the same draws of the others
/// for every `v`.
pub fn estimate_interim(
    mech: &dyn Mechanism,
    net: &DiffusionNetwork,
    priors: &AgentPriors,
    agent: NodeId,
    v: f64,
    samples: u64,
    seed: u64,
) -> Result<InterimEstimate, MechanismError> {
    let m = moments(samples, 2, |t| {
        let mut vals = sample_valuations(priors, &mut trial_rng(seed, t));
        vals.insert(agent, v);
        let out = mech.run(net, &ReportProfile::truthful(net, &vals))?;
        Ok(vec![out.allocation_of(agent), out.payment_of(agent)])
    })?;
    let (allocation, allocation_se) = mean_stderr(m[0].0, m[0].1, samples);
    let (payment, payment_se) = mean_stderr(m[1].0, m[1].1, samples);
    Ok(InterimEstimate { agent, valuation: v, allocation, payment, samples, allocation_se, payment_se })
}
