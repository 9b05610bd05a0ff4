use super::distributions::ValuationDistribution;
use super::BayesError;

/// `w(x) = x - (1 - F(x)) / f(x)`.
pub fn virtual_valuation(dist: &dyn ValuationDistribution, x: f64) -> Result<f64, BayesError> {
    let f = dist.pdf(x);
    if f <= 0.0 {
        return Err(BayesError::ZeroDensity(x));
    }
    Ok(x - dist.sf(x) / f)
}

/// Total version used internally: zero density with remaining mass counts as
/// `-inf`, the top of the support as `x`.
pub(crate) fn virtual_or_floor(dist: &dyn ValuationDistribution, x: f64) -> f64 {
    let f = dist.pdf(x);
    let s = dist.sf(x);
    if s <= 0.0 {
        x
    } else if f <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x - s / f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MhrReport {
    pub is_mhr: bool,
    pub grid: Vec<f64>,
    /// First grid point where the hazard drops, if any.
    pub violation: Option<f64>,
}

/// Point `x` with `sf(x)` just above `tail`, for unbounded supports.
pub(crate) fn tail_point(dist: &dyn ValuationDistribution, tail: f64) -> f64 {
    let mut hi = dist.lower().max(0.0) + 1.0;
    while dist.sf(hi) > tail && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = dist.lower();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dist.sf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Hazard-rate check on `grid_size` evenly spaced points of the support
/// (unbounded supports are cut where `1 - F` falls to 1e-6).
pub fn check_mhr(dist: &dyn ValuationDistribution, grid_size: usize) -> MhrReport {
    let lo = dist.lower();
    let hi = if dist.upper().is_finite() { dist.upper() } else { tail_point(dist, 1e-6) };
    let n = grid_size.max(2);
    // Right endpoint excluded: the hazard is infinite at a finite top.
    let grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let hazard: Vec<f64> = grid.iter().map(|&x| dist.pdf(x) / dist.sf(x)).collect();
    let violation = hazard
        .windows(2)
        .position(|h| h[1] < h[0] - 1e-9 * h[0].abs().max(1.0))
        .map(|i| grid[i + 1]);
    MhrReport { is_mhr: violation.is_none(), grid, violation }
}

pub(crate) fn require_mhr(dist: &dyn ValuationDistribution) -> Result<(), BayesError> {
    let ok = match dist.mhr_hint() {
        Some(h) => h,
        None => check_mhr(dist, 256).is_mhr,
    };
    if ok {
        Ok(())
    } else {
        Err(BayesError::NotMhr(dist.name()))
    }
}

/// Smallest `x` in `[lo, hi]` with `w(x) >= target`, assuming `w` is
/// non-decreasing and `w(hi) >= target`.
pub(crate) fn invert_between(dist: &dyn ValuationDistribution, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    if virtual_or_floor(dist, lo) >= target {
        return lo;
    }
    for _ in 0..200 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if virtual_or_floor(dist, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest `x` with `w(x) >= target`. `w` must be non-decreasing (MHR).
pub fn invert_virtual(dist: &dyn ValuationDistribution, target: f64) -> Result<f64, BayesError> {
    let lo = dist.lower();
    let mut hi = dist.upper();
    if hi.is_infinite() {
        hi = lo.max(0.0) + 1.0;
        while virtual_or_floor(dist, hi) < target {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(BayesError::Infeasible { target });
            }
        }
    } else if virtual_or_floor(dist, hi) < target {
        return Err(BayesError::Infeasible { target });
    }
    Ok(invert_between(dist, target, lo, hi))
}
