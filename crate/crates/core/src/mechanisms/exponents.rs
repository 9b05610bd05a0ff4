use std::collections::BTreeMap;

use serde::Serialize;

use super::MechanismError;
use crate::netcore::NodeId;

/// Per-agent exponents `t_i > 0` for LbLEV. Agents without an entry use 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ExponentVector {
    values: BTreeMap<NodeId, f64>,
}

impl ExponentVector {
    pub fn new(values: BTreeMap<NodeId, f64>) -> Result<Self, MechanismError> {
        for (&id, &t) in &values {
            if !(t.is_finite() && t > 0.0) {
                return Err(MechanismError::NonPositiveExponent(id, t));
            }
        }
        Ok(Self { values })
    }

    /// All exponents equal to one (the IDM special case).
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn get(&self, id: NodeId) -> f64 {
        self.values.get(&id).copied().unwrap_or(1.0)
    }

    pub fn set(&mut self, id: NodeId, t: f64) -> Result<(), MechanismError> {
        if !(t.is_finite() && t > 0.0) {
            return Err(MechanismError::NonPositiveExponent(id, t));
        }
        self.values.insert(id, t);
        Ok(())
    }

    pub fn is_unit(&self) -> bool {
        self.values.values().all(|&t| t == 1.0)
    }

    pub fn as_map(&self) -> &BTreeMap<NodeId, f64> {
        &self.values
    }
}

/// `rho^t` with `0^t = 0`.
pub(crate) fn powered(rho: f64, t: f64) -> f64 {
    if rho <= 0.0 {
        0.0
    } else {
        rho.powf(t)
    }
}
