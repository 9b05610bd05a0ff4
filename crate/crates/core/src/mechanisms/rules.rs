//! Deterministic per-level allocation rules and their threshold payments.

use super::exponents::{powered, ExponentVector};
use super::MechanismError;
use crate::netcore::NodeId;

/// A deterministic rule awarding one level of a referral tree to exactly one
/// candidate, given each candidate's effective valuation. Rules must be
/// monotone in the candidate's own value; ties go to the smaller id.
pub trait LevelRule: Send + Sync {
    fn name(&self) -> String;

    /// `candidates` is non-empty and holds `(id, rho)` pairs with `rho >= 0`.
    fn select(&self, candidates: &[(NodeId, f64)]) -> NodeId;
}

fn argmax_by_score(candidates: &[(NodeId, f64)], score: impl Fn(NodeId, f64) -> f64) -> NodeId {
    let mut best = candidates[0].0;
    let mut best_score = score(candidates[0].0, candidates[0].1);
    for &(id, rho) in &candidates[1..] {
        let s = score(id, rho);
        if s > best_score || (s == best_score && id < best) {
            best = id;
            best_score = s;
        }
    }
    best
}

/// Highest effective valuation wins; with threshold payments this is a
/// second-price auction at every level.
#[derive(Debug, Clone, Copy, Default)]
pub struct ArgmaxRho;

impl LevelRule for ArgmaxRho {
    fn name(&self) -> String {
        "argmax".into()
    }

    fn select(&self, candidates: &[(NodeId, f64)]) -> NodeId {
        argmax_by_score(candidates, |_, rho| rho)
    }
}

/// Highest `rho_i^{t_i}` wins. Its threshold payment is the LbLEV level
/// payment `rho_l^{t_l / t_winner}`.
#[derive(Debug, Clone, Default)]
pub struct ArgmaxPowered {
    pub exponents: ExponentVector,
}

impl ArgmaxPowered {
    pub fn new(exponents: ExponentVector) -> Self {
        Self { exponents }
    }
}

impl LevelRule for ArgmaxPowered {
    fn name(&self) -> String {
        "argmax-exp".into()
    }

    fn select(&self, candidates: &[(NodeId, f64)]) -> NodeId {
        argmax_by_score(candidates, |id, rho| powered(rho, self.exponents.get(id)))
    }
}

const BISECTION_STEPS: usize = 64;
const MONOTONE_PROBES: usize = 8;

/// Threshold payment of `winner` under `rule`: the infimum of values `y >= 0`
/// at which `winner` still wins when its own effective valuation is replaced
/// by `y`. Found by bisection on `[0, 2 * max rho]`; a failed probe on either
/// side of the threshold means the rule is not monotone on this input.
pub fn myerson_level_payment(
    rule: &dyn LevelRule,
    winner: NodeId,
    rho: &[(NodeId, f64)],
) -> Result<f64, MechanismError> {
    let idx = rho
        .iter()
        .position(|&(id, _)| id == winner)
        .ok_or(MechanismError::UnknownCandidate(winner))?;
    if rho.len() <= 1 {
        return Ok(0.0);
    }
    let mut probe = rho.to_vec();
    let mut wins_at = |y: f64| {
        probe[idx].1 = y;
        rule.select(&probe) == winner
    };
    let own = rho[idx].1;
    if !wins_at(own) {
        return Err(MechanismError::WinnerMismatch { expected: winner });
    }
    let rho_max = rho.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    let upper = 2.0 * rho_max;
    if !wins_at(upper) {
        return Err(MechanismError::NonMonotoneRule(rule.name()));
    }
    if wins_at(0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, upper);
    for _ in 0..BISECTION_STEPS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if wins_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > own {
        return Err(MechanismError::NonMonotoneRule(rule.name()));
    }
    for k in 1..=MONOTONE_PROBES {
        let y = hi + (upper - hi) * k as f64 / MONOTONE_PROBES as f64;
        if !wins_at(y) {
            return Err(MechanismError::NonMonotoneRule(rule.name()));
        }
    }
    Ok(hi)
}
