//! Expected payment versus expected virtual surplus, both by quadrature, for
//! one bidder of a two-bidder depth-1 auction with i.i.d. values.

use std::collections::BTreeMap;

use super::distributions::Dist;
use super::quadrature::quadrature_nodes;
use super::virtual_value::tail_point;
use crate::mechanisms::{Mechanism, MechanismError};
use crate::netcore::{DiffusionNetwork, NodeId, ReportProfile};

const PANELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySides {
    /// `E[pay(v)]`.
    pub payment: f64,
    /// `E[w(v) * alpha(v)]`.
    pub virtual_surplus: f64,
}

fn effective_upper(dist: &Dist) -> f64 {
    if dist.upper().is_finite() {
        dist.upper()
    } else {
        tail_point(dist.as_ref(), 1e-15)
    }
}

/// Interim allocation and payment `(alpha(v), pay(v))` of bidder 1,
/// integrating the mechanism's outcome over bidder 2's value.
pub fn two_bidder_interim(mech: &dyn Mechanism, dist: &Dist, v: f64) -> Result<(f64, f64), MechanismError> {
    interim_with_breaks(mech, dist, v, &[])
}

fn interim_with_breaks(
    mech: &dyn Mechanism,
    dist: &Dist,
    v: f64,
    breaks: &[f64],
) -> Result<(f64, f64), MechanismError> {
    let (a, b) = (NodeId(1), NodeId(2));
    let net = DiffusionNetwork::new([a, b], [(NodeId::SELLER, a), (NodeId::SELLER, b)])?;
    let (mut alpha, mut pay) = (0.0, 0.0);
    let mut cuts = breaks.to_vec();
    cuts.push(v);
    for (y, w) in quadrature_nodes(dist.lower(), effective_upper(dist), &cuts, PANELS) {
        let reports = ReportProfile::truthful(&net, &BTreeMap::from([(a, v), (b, y)]));
        let out = mech.run(&net, &reports)?;
        let fy = w * dist.pdf(y);
        alpha += fy * out.allocation_of(a);
        pay += fy * out.payment_of(a);
    }
    Ok((alpha, pay))
}

/// Both sides of `integral pay f = integral w alpha f` for bidder 1.
pub fn appendix_identity(mech: &dyn Mechanism, dist: &Dist) -> Result<IdentitySides, MechanismError> {
    appendix_identity_with_breaks(mech, dist, &[])
}

/// As [`appendix_identity`], splitting both integrals at `breaks`, e.g. a
/// reserve price where the allocation jumps.
pub fn appendix_identity_with_breaks(
    mech: &dyn Mechanism,
    dist: &Dist,
    breaks: &[f64],
) -> Result<IdentitySides, MechanismError> {
    let (mut payment, mut virtual_surplus) = (0.0, 0.0);
    for (v, w) in quadrature_nodes(dist.lower(), effective_upper(dist), breaks, 4 * PANELS) {
        let (alpha, pay) = interim_with_breaks(mech, dist, v, breaks)?;
        payment += w * pay * dist.pdf(v);
        // w(v) f(v) = v f(v) - (1 - F(v)), finite even where f vanishes.
        virtual_surplus += w * (v * dist.pdf(v) - dist.sf(v)) * alpha;
    }
    Ok(IdentitySides { payment, virtual_surplus })
}
