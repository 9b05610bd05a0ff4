//! Named instances used by tests, the CLI and the verifier.

use std::collections::BTreeMap;

use super::ExponentVector;
use crate::netcore::{Instance, InstanceFile, NodeId};

pub const FIG_LBLEV_JSON: &str = include_str!("../../fixtures/fig_lblev.json");
pub const EMPTY_BIDS_JSON: &str = include_str!("../../fixtures/empty_bids.json");

#[derive(Debug, Clone)]
pub struct Fixture {
    pub instance: Instance,
    pub exponents: ExponentVector,
    pub labels: BTreeMap<NodeId, String>,
}

impl Fixture {
    pub fn from_json(text: &str) -> Self {
        let file = InstanceFile::from_json(text).expect("bundled fixture parses");
        Self {
            instance: file.instance().expect("bundled fixture is valid"),
            exponents: ExponentVector::new(file.exponents()).expect("bundled exponents are positive"),
            labels: file.labels(),
        }
    }

    /// Id of the agent with display label `label`.
    pub fn id(&self, label: &str) -> NodeId {
        self.labels
            .iter()
            .find(|(_, l)| l.as_str() == label)
            .map(|(&id, _)| id)
            .unwrap_or_else(|| panic!("no agent labelled {label}"))
    }
}

/// Eleven agents: s -> {A, B, C}, A -> {D, E, F}, E -> {J, K}, plus one leaf
/// under each of B, C and D. Exponents A=1, B=1, C=3, D=1, E=2, F=1, J=1, K=2.
/// With these values K wins, A pays 9^3 = 729, E pays 729 + 6^(1/2) and K
/// pays that plus (745 - 731.449...)^(1/2).
pub fn fig_lblev() -> Fixture {
    Fixture::from_json(FIG_LBLEV_JSON)
}

pub fn empty_bids() -> Fixture {
    Fixture::from_json(EMPTY_BIDS_JSON)
}
