//! Lambda sweep with common random numbers: every lambda sees the same base
//! trees, activations and valuations.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    activate_edges, assign_classes, exponent_schedule, generate_base_tree, sample_class_valuations, tree_reports,
    BaseTree, ExperimentConfig, ValuationClass,
};
use crate::bayes::{mean_stderr, trial_rng};
use crate::mechanisms::{run_idm_tree, run_lblev, ExponentVector, MechanismError};
use crate::netcore::{NodeId, ReferralTree, ReportProfile};

const INNER_SALT: u64 = 0x5EED_1AB1_E5EE_D0FF;

pub const SWEEP_CSV_HEADER: &str = "lambda,n,sigma,outer,inner,mean_pct,stderr,seed";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LambdaRow {
    pub lambda: f64,
    pub mean_pct: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepTable {
    pub config: ExperimentConfig,
    pub rows: Vec<LambdaRow>,
    /// Draws with positive IDM revenue, the ones averaged.
    pub draws: u64,
    /// Draws skipped because IDM revenue was zero.
    pub excluded: u64,
    pub lambda_star: f64,
}

/// One realized draw of the two-stage experiment.
#[derive(Debug, Clone)]
pub struct Draw {
    pub base: BaseTree,
    pub classes: BTreeMap<NodeId, ValuationClass>,
    pub tree: ReferralTree,
    pub valuations: BTreeMap<NodeId, f64>,
    pub reports: ReportProfile,
}

fn outer_stage(config: &ExperimentConfig, outer: usize) -> (BaseTree, BTreeMap<NodeId, ValuationClass>) {
    let mut rng = trial_rng(config.seed, outer as u64);
    let mut base = generate_base_tree(config.n, &mut rng);
    if let Some(p) = config.fixed_activation {
        base = base.with_keep_probability(p);
    }
    let classes = assign_classes(config.n, &mut rng);
    (base, classes)
}

fn inner_rng(seed: u64, outer: usize, inner: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ INNER_SALT);
    rng.set_stream(((outer as u64) << 32) | inner as u64);
    rng
}

fn inner_stage(
    config: &ExperimentConfig,
    base: &BaseTree,
    classes: &BTreeMap<NodeId, ValuationClass>,
    outer: usize,
    inner: usize,
) -> (ReferralTree, BTreeMap<NodeId, f64>, ReportProfile) {
    let mut rng = inner_rng(config.seed, outer, inner);
    let tree = activate_edges(base, &mut rng);
    let valuations = sample_class_valuations(classes, config.class_means, config.sigma, &mut rng);
    let reports = tree_reports(&tree, config.n, &valuations);
    (tree, valuations, reports)
}

/// Reproduces draw `(outer, inner)` of a sweep run with `config`.
pub fn realize(config: &ExperimentConfig, outer: usize, inner: usize) -> Draw {
    let (base, classes) = outer_stage(config, outer);
    let (tree, valuations, reports) = inner_stage(config, &base, &classes, outer, inner);
    Draw { base, classes, tree, valuations, reports }
}

fn class_means(config: &ExperimentConfig, classes: &BTreeMap<NodeId, ValuationClass>) -> BTreeMap<NodeId, f64> {
    classes.iter().map(|(&id, &c)| (id, config.class_mean(c))).collect()
}

#[derive(Debug, Clone)]
struct Moments {
    sums: Vec<(f64, f64)>,
    draws: u64,
    excluded: u64,
    /// Every lambda got unit exponents on this base tree.
    degenerate: bool,
}

fn outer_moments(config: &ExperimentConfig, outer: usize) -> Result<Moments, MechanismError> {
    let (base, classes) = outer_stage(config, outer);
    let means = class_means(config, &classes);
    let schedules: Vec<ExponentVector> =
        config.lambdas.iter().map(|&l| exponent_schedule(&base, &means, l)).collect();
    let degenerate = schedules.iter().all(ExponentVector::is_unit);
    let mut m = Moments { sums: vec![(0.0, 0.0); config.lambdas.len()], draws: 0, excluded: 0, degenerate };
    for inner in 0..config.inner {
        let (tree, _, reports) = inner_stage(config, &base, &classes, outer, inner);
        let r_idm = run_idm_tree(&tree, &reports)?.seller_revenue;
        if r_idm <= 0.0 {
            m.excluded += 1;
            continue;
        }
        m.draws += 1;
        for (slot, t) in m.sums.iter_mut().zip(&schedules) {
            let r = if t.is_unit() { r_idm } else { run_lblev(&tree, &reports, t)?.0.seller_revenue };
            let pct = 100.0 * (r - r_idm) / r_idm;
            slot.0 += pct;
            slot.1 += pct * pct;
        }
    }
    Ok(m)
}

/// Mean percentage revenue improvement of LbLEV over IDM for every lambda in
/// the grid. Outer trials run in parallel and are folded in index order.
pub fn sweep_lambda(config: &ExperimentConfig) -> Result<SweepTable, MechanismError> {
    config.validate().map_err(MechanismError::BadInput)?;
    let per_outer = (0..config.outer)
        .into_par_iter()
        .map(|o| outer_moments(config, o))
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = Moments { sums: vec![(0.0, 0.0); config.lambdas.len()], draws: 0, excluded: 0, degenerate: false };
    let flat = per_outer.iter().filter(|m| m.degenerate).count();
    if flat > 0 {
        log::warn!("{flat} of {} base trees had no usable runner-up subtree; their draws use unit exponents", config.outer);
    }
    for m in per_outer {
        total.draws += m.draws;
        total.excluded += m.excluded;
        for (t, s) in total.sums.iter_mut().zip(m.sums) {
            t.0 += s.0;
            t.1 += s.1;
        }
    }
    if total.excluded > 0 {
        log::info!("{} of {} draws had zero IDM revenue and were skipped", total.excluded, total.draws + total.excluded);
    }
    let rows: Vec<LambdaRow> = config
        .lambdas
        .iter()
        .zip(&total.sums)
        .map(|(&lambda, &(s, q))| {
            if total.draws == 0 {
                return LambdaRow { lambda, mean_pct: 0.0, stderr: 0.0 };
            }
            let (mean_pct, stderr) = mean_stderr(s, q, total.draws);
            LambdaRow { lambda, mean_pct, stderr }
        })
        .collect();
    let lambda_star = argmax_lambda(&rows);
    Ok(SweepTable { config: config.clone(), rows, draws: total.draws, excluded: total.excluded, lambda_star })
}

/// Ties, including an all-flat landscape, go to the smaller lambda.
fn argmax_lambda(rows: &[LambdaRow]) -> f64 {
    let mut best: Option<&LambdaRow> = None;
    for r in rows {
        let better = match best {
            None => true,
            Some(b) => r.mean_pct > b.mean_pct || (r.mean_pct == b.mean_pct && r.lambda < b.lambda),
        };
        if better {
            best = Some(r);
        }
    }
    best.map_or(0.0, |r| r.lambda)
}

/// Grid search for the revenue-maximizing lambda.
pub fn grid_search_lambda_star(config: &ExperimentConfig) -> Result<(f64, SweepTable), MechanismError> {
    let table = sweep_lambda(config)?;
    Ok((table.lambda_star, table))
}

pub fn write_sweep_csv(table: &SweepTable, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    let c = &table.config;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.lambda, c.n, c.sigma, c.outer, c.inner, r.mean_pct, r.stderr, c.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ExperimentConfig {
        ExperimentConfig::new(10, 5.0, vec![0.0, 0.5, 1.0], 6, 8, seed)
    }

    #[test]
    fn zero_lambda_row_is_exactly_zero() {
        let t = sweep_lambda(&small(3)).unwrap();
        assert_eq!(t.rows[0].mean_pct, 0.0);
        assert_eq!(t.rows[0].stderr, 0.0);
        assert_eq!(t.draws + t.excluded, 48);
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(sweep_lambda(&small(11)).unwrap(), sweep_lambda(&small(11)).unwrap());
        assert_ne!(sweep_lambda(&small(11)).unwrap().rows, sweep_lambda(&small(12)).unwrap().rows);
    }

    #[test]
    fn realize_matches_stage_functions() {
        let cfg = small(7);
        let d = realize(&cfg, 2, 5);
        let (base, classes) = outer_stage(&cfg, 2);
        assert_eq!(d.base, base);
        assert_eq!(d.classes, classes);
        assert_eq!(d.tree, inner_stage(&cfg, &base, &classes, 2, 5).0);
    }

    #[test]
    fn flat_landscape_picks_zero() {
        let mut cfg = small(1);
        cfg.class_means = [70.0, 70.0, 70.0];
        let t = sweep_lambda(&cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.mean_pct == 0.0));
        assert_eq!(t.lambda_star, 0.0);
    }

    #[test]
    fn csv_shape() {
        let t = sweep_lambda(&small(2)).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,10,5,6,8,0,0,2"));
    }
}
