//! One agent's allocation and payment as functions of its own reported
//! valuation, sampled on a grid and refined around allocation jumps.

/// Allocation differences below this are treated as flat.
const FLAT: f64 = 1e-12;
/// Refinement brackets each jump to this width relative to the grid scale.
const BRACKET: f64 = 1e-12;
/// Cap on mechanism evaluations spent refining a single profile.
const REFINE_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub v: f64,
    pub g: f64,
    pub p: f64,
    /// `integral_0^v g(y) dy` by trapezoid over the refined points.
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProfile {
    points: Vec<ProfilePoint>,
    /// Position of each base grid value inside `points`.
    base: Vec<usize>,
}

impl AllocationProfile {
    /// Evaluates `eval(v) = (g, p)` at every `base` value (sorted, starting at
    /// 0) and bisects every interval whose endpoints differ in allocation.
    pub fn build<E>(
        base: &[f64],
        mut eval: impl FnMut(f64) -> Result<(f64, f64), E>,
    ) -> Result<Self, E> {
        debug_assert!(base.windows(2).all(|w| w[0] < w[1]));
        let scale = base.last().copied().unwrap_or(1.0).abs().max(1.0);
        let width = BRACKET * scale;
        let mut raw: Vec<(f64, f64, f64)> = Vec::with_capacity(base.len());
        for &v in base {
            let (g, p) = eval(v)?;
            raw.push((v, g, p));
        }
        let mut extra = Vec::new();
        let mut budget = REFINE_BUDGET;
        for w in 0..raw.len().saturating_sub(1) {
            let (lo, hi) = (raw[w], raw[w + 1]);
            if (lo.1 - hi.1).abs() > FLAT {
                refine(lo, hi, width, &mut budget, &mut eval, &mut extra)?;
            }
        }
        let n_base = raw.len();
        let mut tagged: Vec<((f64, f64, f64), Option<usize>)> =
            raw.into_iter().enumerate().map(|(i, r)| (r, Some(i))).collect();
        tagged.extend(extra.into_iter().map(|r| (r, None)));
        tagged.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0));

        let mut points = Vec::with_capacity(tagged.len());
        let mut base_idx = vec![0; n_base];
        let mut acc = 0.0;
        for (k, &((v, g, p), slot)) in tagged.iter().enumerate() {
            if k > 0 {
                let prev: &ProfilePoint = &points[k - 1];
                acc += 0.5 * (prev.g + g) * (v - prev.v);
            }
            points.push(ProfilePoint { v, g, p, integral: acc });
            if let Some(i) = slot {
                base_idx[i] = k;
            }
        }
        Ok(Self { points, base: base_idx })
    }

    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }

    /// Points at the base grid values, in grid order.
    pub fn base_points(&self) -> impl Iterator<Item = &ProfilePoint> + '_ {
        self.base.iter().map(|&i| &self.points[i])
    }

    pub fn base_point(&self, i: usize) -> &ProfilePoint {
        &self.points[self.base[i]]
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    /// Value-independent payment component `p(0)`.
    pub fn vipc(&self) -> f64 {
        self.points[0].p
    }

    /// Point at exactly `v`, if sampled.
    pub fn at(&self, v: f64) -> Option<&ProfilePoint> {
        self.points.iter().find(|pt| pt.v == v)
    }
}

fn refine<E>(
    lo: (f64, f64, f64),
    hi: (f64, f64, f64),
    width: f64,
    budget: &mut usize,
    eval: &mut impl FnMut(f64) -> Result<(f64, f64), E>,
    out: &mut Vec<(f64, f64, f64)>,
) -> Result<(), E> {
    if hi.0 - lo.0 <= width || *budget == 0 {
        return Ok(());
    }
    let mid = lo.0 + 0.5 * (hi.0 - lo.0);
    if mid <= lo.0 || mid >= hi.0 {
        return Ok(());
    }
    *budget -= 1;
    let (g, p) = eval(mid)?;
    let m = (mid, g, p);
    out.push(m);
    if (lo.1 - g).abs() > FLAT {
        refine(lo, m, width, budget, eval, out)?;
    }
    if (g - hi.1).abs() > FLAT {
        refine(m, hi, width, budget, eval, out)?;
    }
    Ok(())
}

/// `n` uniform points on `[0, upper]` merged with `extra`, sorted and deduplicated.
pub fn base_grid(n: usize, upper: f64, extra: &[f64]) -> Vec<f64> {
    let n = n.max(2);
    let mut pts: Vec<f64> = (0..n).map(|k| upper * k as f64 / (n - 1) as f64).collect();
    pts.extend_from_slice(extra);
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}
