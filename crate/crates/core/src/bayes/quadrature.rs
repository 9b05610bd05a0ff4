//! Composite Gauss-Legendre quadrature with user breakpoints.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, `n >= 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x).
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const ORDER: usize = 20;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Composite-rule nodes and weights on `[a, b]`, `panels` equal panels
/// between consecutive breakpoints. Breakpoints outside `(a, b)` are ignored.
pub fn quadrature_nodes(a: f64, b: f64, breaks: &[f64], panels: usize) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (xs, ws) = rule();
    let panels = panels.max(1);
    let mut out = Vec::with_capacity((cuts.len() - 1) * panels * ORDER);
    for seg in cuts.windows(2) {
        let h = (seg[1] - seg[0]) / panels as f64;
        for k in 0..panels {
            let (mid, half) = (seg[0] + h * (k as f64 + 0.5), 0.5 * h);
            out.extend(xs.iter().zip(ws).map(|(x, w)| (mid + half * x, half * w)));
        }
    }
    out
}

pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, breaks: &[f64], panels: usize) -> f64 {
    quadrature_nodes(a, b, breaks, panels).into_iter().map(|(x, w)| w * f(x)).sum()
}
