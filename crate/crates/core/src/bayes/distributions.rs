use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::BayesError;

/// A valuation prior on `[lower, upper]`; `upper` may be infinite.
pub trait ValuationDistribution: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    /// `1 - F(x)`, overridden where cancellation matters.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
    fn lower(&self) -> f64 {
        0.0
    }
    fn upper(&self) -> f64;
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
    /// Known hazard-rate status, when the family guarantees one.
    fn mhr_hint(&self) -> Option<bool> {
        None
    }
}

pub type Dist = Arc<dyn ValuationDistribution>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    pub a: f64,
    pub b: f64,
}

impl Uniform {
    pub fn new(a: f64, b: f64) -> Result<Self, BayesError> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
            return Err(BayesError::BadSpec(format!("uniform needs 0 <= a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }
}

impl ValuationDistribution for Uniform {
    fn name(&self) -> String {
        format!("uniform:{}:{}", self.a, self.b)
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }
    fn pdf(&self, x: f64) -> f64 {
        if (self.a..=self.b).contains(&x) {
            1.0 / (self.b - self.a)
        } else {
            0.0
        }
    }
    fn lower(&self) -> f64 {
        self.a
    }
    fn upper(&self) -> f64 {
        self.b
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.a + (self.b - self.a) * rng.random::<f64>()
    }
    fn mhr_hint(&self) -> Option<bool> {
        Some(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self, BayesError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(BayesError::BadSpec(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(Self { rate })
    }
}

impl ValuationDistribution for Exponential {
    fn name(&self) -> String {
        format!("exp:{}", self.rate)
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }
    fn upper(&self) -> f64 {
        f64::INFINITY
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        -(-u).ln_1p() / self.rate
    }
    fn mhr_hint(&self) -> Option<bool> {
        Some(true)
    }
}

/// Normal `N(mu, sigma^2)` conditioned on `x >= 0`.
#[derive(Debug, Clone)]
pub struct TruncNormal {
    pub mu: f64,
    pub sigma: f64,
    normal: Normal,
    mass_below: f64,
}

impl TruncNormal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, BayesError> {
        let normal = Normal::new(mu, sigma)
            .map_err(|e| BayesError::BadSpec(format!("normal({mu}, {sigma}): {e}")))?;
        let mass_below = normal.cdf(0.0);
        if mass_below >= 1.0 {
            return Err(BayesError::BadSpec(format!("normal({mu}, {sigma}) has no mass above 0")));
        }
        Ok(Self { mu, sigma, normal, mass_below })
    }

    fn kept(&self) -> f64 {
        1.0 - self.mass_below
    }
}

impl ValuationDistribution for TruncNormal {
    fn name(&self) -> String {
        format!("tnorm:{}:{}", self.mu, self.sigma)
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            ((self.normal.cdf(x) - self.mass_below) / self.kept()).clamp(0.0, 1.0)
        }
    }
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.normal.pdf(x) / self.kept()
        }
    }
    fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (self.normal.sf(x) / self.kept()).min(1.0)
        }
    }
    fn upper(&self) -> f64 {
        f64::INFINITY
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = rng.random();
        let p = self.mass_below + u * self.kept();
        self.normal.inverse_cdf(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)).max(0.0)
    }
    fn mhr_hint(&self) -> Option<bool> {
        Some(true)
    }
}

/// Distribution of the maximum of `n` independent draws from `base`.
#[derive(Debug, Clone)]
pub struct MaxOfIid {
    pub base: Dist,
    pub n: usize,
}

impl ValuationDistribution for MaxOfIid {
    fn name(&self) -> String {
        format!("max{}({})", self.n, self.base.name())
    }
    fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(x).powi(self.n as i32)
    }
    fn pdf(&self, x: f64) -> f64 {
        let n = self.n as f64;
        let f = self.base.pdf(x);
        if self.n == 1 {
            f
        } else {
            n * self.base.cdf(x).powi(self.n as i32 - 1) * f
        }
    }
    fn sf(&self, x: f64) -> f64 {
        let s = self.base.sf(x);
        -((self.n as f64) * (-s).ln_1p()).exp_m1()
    }
    fn lower(&self) -> f64 {
        self.base.lower()
    }
    fn upper(&self) -> f64 {
        self.base.upper()
    }
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        (0..self.n).map(|_| self.base.sample(rng)).fold(f64::NEG_INFINITY, f64::max)
    }
    fn mhr_hint(&self) -> Option<bool> {
        // Maxima of i.i.d. MHR draws are MHR again.
        self.base.mhr_hint().filter(|&m| m)
    }
}

pub fn max_of_iid(dist: Dist, n: usize) -> Result<Dist, BayesError> {
    match n {
        0 => Err(BayesError::BadSpec("max of zero draws".into())),
        1 => Ok(dist),
        _ => Ok(Arc::new(MaxOfIid { base: dist, n })),
    }
}

/// Parses `uniform:A:B`, `exp:RATE` or `tnorm:MU:SIGMA`.
pub fn parse_distribution(spec: &str) -> Result<Dist, BayesError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim().parse::<f64>().map_err(|_| BayesError::BadSpec(format!("bad number {s:?} in {spec:?}")))
    };
    Ok(match parts.as_slice() {
        ["uniform", a, b] => Arc::new(Uniform::new(num(a)?, num(b)?)?),
        ["exp", r] => Arc::new(Exponential::new(num(r)?)?),
        ["tnorm", m, s] => Arc::new(TruncNormal::new(num(m)?, num(s)?)?),
        _ => return Err(BayesError::BadSpec(format!("unknown distribution {spec:?}"))),
    })
}
