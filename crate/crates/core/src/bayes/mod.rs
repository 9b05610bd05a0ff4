//! Priors, virtual valuations, the maxViVa auction and Monte Carlo
//! estimators of interim and expected quantities.

mod distributions;
mod identity;
mod maxviva;
mod montecarlo;
pub mod quadrature;
mod virtual_value;

use thiserror::Error;

use crate::mechanisms::MechanismError;
use crate::netcore::NodeId;

pub use distributions::{
    max_of_iid, parse_distribution, Dist, Exponential, MaxOfIid, TruncNormal, Uniform, ValuationDistribution,
};
pub use identity::{appendix_identity, appendix_identity_with_breaks, two_bidder_interim, IdentitySides};
pub use maxviva::{maxviva_level, run_maxviva, FirstLevelPriors, LevelDecision, MaxViVa, ReserveSecondPrice};
pub use montecarlo::{
    estimate_interim, expected_revenue, iid_priors, mean_stderr, paired_revenue, sample_valuations, trial_rng,
    AgentPriors, InterimEstimate, PairedRevenue, RevenueEstimate,
};
pub use virtual_value::{check_mhr, invert_virtual, virtual_valuation, MhrReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("density vanishes at {0}")]
    ZeroDensity(f64),
    #[error("{0} does not have a monotone hazard rate")]
    NotMhr(String),
    #[error("virtual valuation never reaches {target}")]
    Infeasible { target: f64 },
    #[error("no prior for first-level node {0}")]
    MissingPrior(NodeId),
    #[error("{0}")]
    BadSpec(String),
}

impl From<BayesError> for MechanismError {
    fn from(e: BayesError) -> Self {
        MechanismError::Prior(e.to_string())
    }
}
