//! LbLEV versus IDM revenue on randomly generated referral trees.
//!
//! A base tree is drawn first (known to the designer), together with one
//! Beta(5,1) edge-keep probability per node and the placement of valuation
//! classes. Each inner draw then activates edges and samples valuations.
//! Exponents depend only on the base tree and the class means.

mod sweep;

use std::collections::{BTreeMap, VecDeque};

use log::debug;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::mechanisms::ExponentVector;
use crate::netcore::{DiffusionNetwork, NodeId, ReferralTree, ReportProfile};

pub use sweep::{
    grid_search_lambda_star, realize, sweep_lambda, write_sweep_csv, Draw, LambdaRow, SweepTable, SWEEP_CSV_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuationClass {
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub sigma: f64,
    pub lambdas: Vec<f64>,
    pub outer: usize,
    pub inner: usize,
    pub seed: u64,
    /// Means of the high, medium and low classes.
    pub class_means: [f64; 3],
    /// Keep every edge with this probability instead of a Beta(5,1) draw.
    pub fixed_activation: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(n: usize, sigma: f64, lambdas: Vec<f64>, outer: usize, inner: usize, seed: u64) -> Self {
        Self {
            n,
            sigma,
            lambdas,
            outer,
            inner,
            seed,
            class_means: [100.0, 70.0, 50.0],
            fixed_activation: None,
        }
    }

    /// `sigma = 0` is accepted as the degenerate point-mass case.
    pub fn validate(&self) -> Result<(), String> {
        if self.n < 3 {
            return Err(format!("n must be at least 3, got {}", self.n));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err("lambda grid must be non-empty and inside [0, 1]".into());
        }
        if self.outer == 0 || self.inner == 0 {
            return Err("trial counts must be positive".into());
        }
        if let Some(p) = self.fixed_activation {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("activation probability {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn class_mean(&self, c: ValuationClass) -> f64 {
        match c {
            ValuationClass::High => self.class_means[0],
            ValuationClass::Medium => self.class_means[1],
            ValuationClass::Low => self.class_means[2],
        }
    }
}

/// Parses `lo:hi:step` into an inclusive grid.
pub fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad lambda grid {spec:?}")))
        .collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(format!("lambda grid must be lo:hi:step, got {spec:?}"));
    };
    if !(step > 0.0) || hi < lo {
        return Err(format!("bad lambda grid {spec:?}"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    // Round to the step's precision so 0.05-steps print as 0.35, not 0.35000000000000003.
    Ok((0..=count).map(|k| ((lo + step * k as f64) * 1e9).round() / 1e9).collect())
}

/// Base tree over agents `1..=n` under the seller.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseTree {
    pub n: usize,
    pub children: BTreeMap<NodeId, Vec<NodeId>>,
    /// Children-set size drawn for each parent, in construction order.
    pub drawn_sizes: Vec<usize>,
    /// Probability that each child edge of a node is kept.
    pub keep: BTreeMap<NodeId, f64>,
}

impl BaseTree {
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.children.get(&id).map_or(&[], Vec::as_slice)
    }

    pub fn with_keep_probability(mut self, p: f64) -> Self {
        for k in self.keep.values_mut() {
            *k = p;
        }
        self
    }

    fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = vec![id];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(self.children(out[i]));
            i += 1;
        }
        out
    }

    pub fn as_referral_tree(&self) -> ReferralTree {
        let parents = self
            .children
            .iter()
            .flat_map(|(&p, kids)| kids.iter().map(move |&c| (c, p)))
            .collect();
        ReferralTree::from_parents(parents).expect("base trees are trees")
    }
}

/// Beta(5,1) by inverse cdf.
fn beta51<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>().powf(0.2)
}

/// Level-order construction: each parent in turn takes a uniformly drawn
/// number in `[1, max(1, n/3)]` of the remaining agents, capped at what is left.
pub fn generate_base_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BaseTree {
    let mut remaining: Vec<NodeId> = (1..=n as u32).map(NodeId).collect();
    remaining.shuffle(rng);
    let max_size = (n / 3).max(1);
    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut drawn_sizes = Vec::new();
    let mut queue = VecDeque::from([NodeId::SELLER]);
    while !remaining.is_empty() {
        let parent = queue.pop_front().expect("every placed agent joins the queue");
        let k = rng.random_range(1..=max_size);
        drawn_sizes.push(k);
        let take = k.min(remaining.len());
        let mut kids: Vec<NodeId> = remaining.drain(..take).collect();
        kids.sort_unstable();
        queue.extend(kids.iter().copied());
        children.insert(parent, kids);
    }
    let keep = std::iter::once(NodeId::SELLER)
        .chain((1..=n as u32).map(NodeId))
        .map(|id| (id, beta51(rng)))
        .collect();
    BaseTree { n, children, drawn_sizes, keep }
}

/// Keeps each base edge independently with its parent's keep probability and
/// returns the part still reachable from the seller.
pub fn activate_edges<R: Rng + ?Sized>(base: &BaseTree, rng: &mut R) -> ReferralTree {
    let mut parents = BTreeMap::new();
    let mut queue = VecDeque::from([NodeId::SELLER]);
    while let Some(p) = queue.pop_front() {
        let keep = base.keep.get(&p).copied().unwrap_or(1.0);
        for &c in base.children(p) {
            if rng.random::<f64>() < keep {
                parents.insert(c, p);
                queue.push_back(c);
            }
        }
    }
    ReferralTree::from_parents(parents).expect("activated edges form a tree")
}

/// One high, `(n-1)/2` medium and the rest low, placed uniformly at random.
pub fn assign_classes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BTreeMap<NodeId, ValuationClass> {
    let medium = (n - 1) / 2;
    let mut classes: Vec<ValuationClass> = std::iter::once(ValuationClass::High)
        .chain(std::iter::repeat_n(ValuationClass::Medium, medium))
        .chain(std::iter::repeat_n(ValuationClass::Low, n - 1 - medium))
        .collect();
    classes.shuffle(rng);
    (1..=n as u32).map(NodeId).zip(classes).collect()
}

/// Normal draws around each agent's class mean, clamped at zero.
pub fn sample_class_valuations<R: Rng + ?Sized>(
    classes: &BTreeMap<NodeId, ValuationClass>,
    means: [f64; 3],
    sigma: f64,
    rng: &mut R,
) -> BTreeMap<NodeId, f64> {
    classes
        .iter()
        .map(|(&id, &c)| {
            let mu = match c {
                ValuationClass::High => means[0],
                ValuationClass::Medium => means[1],
                ValuationClass::Low => means[2],
            };
            let z: f64 = rng.sample(rand_distr_normal());
            (id, (mu + sigma * z).max(0.0))
        })
        .collect()
}

/// Fresh class placement and valuations for agents `1..=n`.
pub fn sample_valuations<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> BTreeMap<NodeId, f64> {
    let classes = assign_classes(n, rng);
    sample_class_valuations(&classes, [100.0, 70.0, 50.0], sigma, rng)
}

fn rand_distr_normal() -> StandardNormal {
    StandardNormal
}

/// Standard normal via Box-Muller, two uniforms per draw.
#[derive(Debug, Clone, Copy)]
struct StandardNormal;

impl rand::distr::Distribution<f64> for StandardNormal {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Runner-up exponent `(1 - lambda) + lambda * ln(w_win) / ln(w_run)` from the
/// first-level subtree maxima of `means` on the base tree; every other
/// agent keeps exponent 1.
pub fn exponent_schedule(base: &BaseTree, means: &BTreeMap<NodeId, f64>, lambda: f64) -> ExponentVector {
    let mut first: Vec<(NodeId, f64)> = base
        .children(NodeId::SELLER)
        .iter()
        .map(|&c| {
            let m = base.subtree(c).iter().map(|a| means.get(a).copied().unwrap_or(0.0)).fold(0.0, f64::max);
            (c, m)
        })
        .collect();
    if first.len() < 2 {
        debug!("base tree has {} first-level subtree(s); using unit exponents", first.len());
        return ExponentVector::unit();
    }
    first.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let (w_win, (runner, w_run)) = (first[0].1, first[1]);
    let ratio = w_win.ln() / w_run.ln();
    if !(ratio.is_finite() && ratio > 0.0) {
        debug!("expected first-level maxima {w_win} and {w_run} give no usable log ratio; using unit exponents");
        return ExponentVector::unit();
    }
    let mut t = ExponentVector::unit();
    t.set(runner, (1.0 - lambda) + lambda * ratio).expect("convex combination of positive numbers");
    t
}

/// The realized tree as a network whose edges are the tree edges.
pub fn tree_network(tree: &ReferralTree, n: usize) -> DiffusionNetwork {
    let edges: Vec<(NodeId, NodeId)> = tree.agents().map(|c| (tree.parent(c).expect("agent"), c)).collect();
    DiffusionNetwork::new((1..=n as u32).map(NodeId), edges).expect("tree edges are valid")
}

/// Truthful reports on a realized tree: neighbours are the tree children.
pub fn tree_reports(tree: &ReferralTree, n: usize, valuations: &BTreeMap<NodeId, f64>) -> ReportProfile {
    ReportProfile::truthful(&tree_network(tree, n), valuations)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn base_tree_sizes_and_placement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 3, 9, 20] {
            let b = generate_base_tree(n, &mut rng);
            let max = (n / 3).max(1);
            assert!(b.drawn_sizes.iter().all(|&k| (1..=max).contains(&k)));
            let placed: usize = b.children.values().map(Vec::len).sum();
            assert_eq!(placed, n);
            assert_eq!(b.as_referral_tree().len(), n);
        }
        let one = generate_base_tree(1, &mut rng);
        assert_eq!(one.children(NodeId::SELLER), &[NodeId(1)]);
    }

    #[test]
    fn base_tree_is_deterministic() {
        let a = generate_base_tree(12, &mut ChaCha8Rng::seed_from_u64(9));
        let b = generate_base_tree(12, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn activation_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = generate_base_tree(10, &mut rng);
        let full = activate_edges(&base.clone().with_keep_probability(1.0), &mut rng);
        assert_eq!(full, base.as_referral_tree());
        let none = activate_edges(&base.with_keep_probability(0.0), &mut rng);
        assert!(none.is_empty());
    }

    #[test]
    fn class_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = assign_classes(11, &mut rng);
        let count = |k| c.values().filter(|&&x| x == k).count();
        assert_eq!(
            (count(ValuationClass::High), count(ValuationClass::Medium), count(ValuationClass::Low)),
            (1, 5, 5)
        );
        let v = sample_class_valuations(&c, [100.0, 70.0, 50.0], 0.0, &mut rng);
        for (id, cls) in &c {
            let expect = match cls {
                ValuationClass::High => 100.0,
                ValuationClass::Medium => 70.0,
                ValuationClass::Low => 50.0,
            };
            assert_eq!(v[id], expect);
        }
        let wide = sample_valuations(11, 500.0, &mut rng);
        assert!(wide.values().all(|&x| x >= 0.0));
    }

    #[test]
    fn lambda_grid() {
        let g = parse_lambda_grid("0:1:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[7], 0.35);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(parse_lambda_grid("0:1").is_err());
    }
}
