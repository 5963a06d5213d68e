//! The unit Teissier law on (0, 1).
//!
//! With t = x^{−θ}, the cdf is F(x) = t·e^{1−t} and the density is
//! f(x) = θ(t − 1)·t·e^{1−t}/x. Everything is evaluated through
//! ln t = −θ·ln x so tiny x underflow gracefully instead of producing NaN.

use std::f64::consts::E;

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::lambert_w_m1;

/// Above this value of t = x^{−θ}, e^{1−t} underflows and F, f are returned as 0.
const T_UNDERFLOW: f64 = 745.0;

/// A probability in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("probability must lie in [0, 1], got {p}"));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Unit Teissier distribution with shape θ > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitTeissier {
    theta: f64,
}

impl UnitTeissier {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 {
            return domain(format!("theta must be positive and finite, got {theta}"));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// ln t with t = x^{−θ}; x must be in (0, 1).
    #[inline]
    fn ln_t(&self, x: f64) -> f64 {
        -self.theta * x.ln()
    }

    /// ln F(x) for x in (0, 1).
    #[inline]
    pub(crate) fn ln_cdf_inner(&self, x: f64) -> f64 {
        let ln_t = self.ln_t(x);
        let t = ln_t.exp();
        ln_t + 1.0 - t
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        let ln_t = self.ln_t(x);
        let t = ln_t.exp();
        if t > T_UNDERFLOW {
            return 0.0;
        }
        let t_minus_1 = ln_t.exp_m1();
        self.theta * t_minus_1 / x * (ln_t + 1.0 - t).exp()
    }

    /// Log density, an error outside (0, 1). Returns −∞ where the density
    /// underflows or vanishes (x → 1).
    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("log density is defined on (0, 1), got {x}"));
        }
        Ok(self.log_pdf_inner(x))
    }

    #[inline]
    pub(crate) fn log_pdf_inner(&self, x: f64) -> f64 {
        let ln_x = x.ln();
        let ln_t = -self.theta * ln_x;
        let t_minus_1 = ln_t.exp_m1();
        self.theta.ln() - (self.theta + 1.0) * ln_x + t_minus_1.ln() - t_minus_1
    }

    pub fn cdf(&self, x: f64) -> Probability {
        Probability(self.cdf_value(x))
    }

    #[inline]
    pub(crate) fn cdf_value(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let ln_t = self.ln_t(x);
        if ln_t.exp() > T_UNDERFLOW {
            return 0.0;
        }
        self.ln_cdf_inner(x).exp().min(1.0)
    }

    /// 1 − F(x), computed without cancellation near x = 1.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 1.0;
        }
        if x >= 1.0 {
            return 0.0;
        }
        (-self.ln_cdf_inner(x).exp_m1()).max(0.0)
    }

    /// f(x)/(1 − F(x)); an error when the survival function underflows.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("hazard is defined on (0, 1), got {x}"));
        }
        let s = self.sf(x);
        if s <= 0.0 {
            return domain(format!("survival function underflows at x = {x}"));
        }
        Ok(self.pdf(x) / s)
    }

    /// Inverse cdf: x = t^{−1/θ} with t = −W₋₁(−p/e).
    ///
    /// The limits at p = 0 and p = 1 are 0 and 1; both are rejected.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile needs p in (0, 1), got {p}"));
        }
        let t = -lambert_w_m1(-p / E)?;
        Ok((-t.ln() / self.theta).exp())
    }

    /// `n` inverse-transform draws from a ChaCha8 stream keyed by `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(&mut rng);
                self.quantile(u)
                    .expect("open-interval uniform is a valid probability")
            })
            .collect()
    }
}
