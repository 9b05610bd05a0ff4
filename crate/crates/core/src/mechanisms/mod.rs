//! Diffusion auctions on referral trees.

mod exponents;
pub mod fixtures;
mod lblev;
mod level;
mod rc_example;
mod rules;

use std::sync::Arc;

use thiserror::Error;

use crate::netcore::{
    build_referral_tree, DiffusionNetwork, NetError, NodeId, Outcome, ReferralTree, ReportProfile,
};

pub use exponents::ExponentVector;
pub use lblev::{run_idm_tree, run_lblev, run_referral_auction, run_referral_on_tree};
pub use level::LevelTrace;
pub(crate) use level::{run_levels, LevelPolicy};
pub(crate) use lblev::RulePolicy;
pub use rc_example::{rc_example_mechanism, rc_example_on, rc_example_vipcs, Rc3};
pub use rules::{myerson_level_payment, ArgmaxPowered, ArgmaxRho, LevelRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanismError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("exponent of {0} must be positive and finite, got {1}")]
    NonPositiveExponent(NodeId, f64),
    #[error("level rule {0} is not monotone on this input")]
    NonMonotoneRule(String),
    #[error("rule does not select {expected} at its reported value")]
    WinnerMismatch { expected: NodeId },
    #[error("{0} is not a level candidate")]
    UnknownCandidate(NodeId),
    #[error("{0}")]
    BadInput(String),
    #[error("prior: {0}")]
    Prior(String),
}

/// A direct-revelation mechanism over a diffusion network.
pub trait Mechanism: Send + Sync {
    fn name(&self) -> String;

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError>;

    fn run_traced(
        &self,
        net: &DiffusionNetwork,
        reports: &ReportProfile,
    ) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
        self.run(net, reports).map(|o| (o, Vec::new()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lblev {
    pub exponents: ExponentVector,
}

impl Lblev {
    pub fn new(exponents: ExponentVector) -> Self {
        Self { exponents }
    }
}

impl Mechanism for Lblev {
    fn name(&self) -> String {
        "lblev".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        self.run_traced(net, reports).map(|(o, _)| o)
    }

    fn run_traced(
        &self,
        net: &DiffusionNetwork,
        reports: &ReportProfile,
    ) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
        let tree = ReferralTree::from_tree_network(net, reports)?;
        run_lblev(&tree, reports, &self.exponents)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Idm;

impl Mechanism for Idm {
    fn name(&self) -> String {
        "idm".into()
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        self.run_traced(net, reports).map(|(o, _)| o)
    }

    fn run_traced(
        &self,
        net: &DiffusionNetwork,
        reports: &ReportProfile,
    ) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
        let tree = ReferralTree::from_tree_network(net, reports)?;
        run_lblev(&tree, reports, &ExponentVector::unit())
    }
}

/// Referral auction with a pluggable level rule. Works on general networks.
#[derive(Clone)]
pub struct ReferralAuction {
    pub rule: Arc<dyn LevelRule>,
}

impl ReferralAuction {
    pub fn new(rule: impl LevelRule + 'static) -> Self {
        Self { rule: Arc::new(rule) }
    }
}

impl Mechanism for ReferralAuction {
    fn name(&self) -> String {
        format!("ra:{}", self.rule.name())
    }

    fn run(&self, net: &DiffusionNetwork, reports: &ReportProfile) -> Result<Outcome, MechanismError> {
        self.run_traced(net, reports).map(|(o, _)| o)
    }

    fn run_traced(
        &self,
        net: &DiffusionNetwork,
        reports: &ReportProfile,
    ) -> Result<(Outcome, Vec<LevelTrace>), MechanismError> {
        let tree = build_referral_tree(net, reports);
        run_referral_on_tree(&tree, reports, self.rule.as_ref())
    }
}
