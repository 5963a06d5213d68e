//! Point estimation of θ.
//!
//! Each method is a scalar objective in θ where smaller is better; quantities
//! that are maximized (likelihood, mean log-spacing) are negated. The shared
//! driver searches u = ln θ over [ln 1e-3, ln 1e3] with a coarse scan followed
//! by Brent's method.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::UnitTeissier;
use crate::error::{Error, Result};
use crate::moments::{raw_moment, sample_l_moments};
use crate::numerics::{
    find_root, minimize_scalar, second_derivative, Bracket, MINIMIZE_TOL, ROOT_TOL,
};
use crate::sample::Sample;
use crate::specfun::lambert_w_m1;

pub const THETA_MIN: f64 = 1e-3;
pub const THETA_MAX: f64 = 1e3;
/// Distance in ln θ from a bracket end below which a fit is flagged as a boundary solution.
const BOUNDARY_TOL: f64 = 1e-6;
const SCAN_POINTS: usize = 121;
const TIE_JITTER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Mle,
    Lse,
    Wlse,
    Crvme,
    Mpse,
    Pce,
    Ade,
    #[serde(alias = "RTADE")]
    Rade,
    Lme,
}

impl Method {
    /// All nine methods in the column order of the simulation tables.
    pub const ALL: [Method; 9] = [
        Method::Mle,
        Method::Lse,
        Method::Wlse,
        Method::Crvme,
        Method::Mpse,
        Method::Pce,
        Method::Ade,
        Method::Rade,
        Method::Lme,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mle => "MLE",
            Method::Lse => "LSE",
            Method::Wlse => "WLSE",
            Method::Crvme => "CRVME",
            Method::Mpse => "MPSE",
            Method::Pce => "PCE",
            Method::Ade => "ADE",
            Method::Rade => "RADE",
            Method::Lme => "LME",
        }
    }

    /// Smallest sample the method accepts.
    pub fn min_n(self) -> usize {
        match self {
            Method::Mle | Method::Mpse => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        if upper == "RTADE" {
            return Ok(Method::Rade);
        }
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == upper)
            .ok_or_else(|| Error::Invalid(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: Method,
    pub theta_hat: f64,
    /// Wald standard error from observed information; MLE only.
    pub std_error: Option<f64>,
    pub objective_at_opt: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Per-sample quantities shared by every evaluation of an objective.
struct Prepared<'a> {
    method: Method,
    n: usize,
    /// ln x_{i:n}, ascending.
    ln_x: Vec<f64>,
    sample: &'a Sample,
    /// ln t_i with t_i = −W₋₁(−p_i/e), p_i = i/(n+1); PCE only.
    pce_ln_t: Vec<f64>,
    /// First sample L-moment; LME only.
    l1: f64,
}

impl<'a> Prepared<'a> {
    fn new(method: Method, sample: &'a Sample) -> Result<Self> {
        let n = sample.len();
        if n < method.min_n() {
            return Err(Error::Invalid(format!(
                "{method} needs at least {} observations, got {n}",
                method.min_n()
            )));
        }
        let sorted = sample.sorted();
        let ln_x = if method == Method::Mpse {
            jitter_ties(sorted).iter().map(|x| x.ln()).collect()
        } else {
            sorted.iter().map(|x| x.ln()).collect()
        };
        let pce_ln_t = if method == Method::Pce {
            (1..=n)
                .map(|i| {
                    let p = i as f64 / (n + 1) as f64;
                    lambert_w_m1(-p / E).map(|w| (-w).ln())
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let l1 = if method == Method::Lme {
            sample_l_moments(sample)?.l1
        } else {
            0.0
        };
        Ok(Self {
            method,
            n,
            ln_x,
            sample,
            pce_ln_t,
            l1,
        })
    }

    fn eval(&self, theta: f64) -> f64 {
        if !(theta > 0.0 && theta.is_finite()) {
            return f64::INFINITY;
        }
        let v = match self.method {
            Method::Mle => -log_likelihood_ln(&self.ln_x, theta),
            Method::Lse => self.least_squares(theta, |_| 1.0),
            Method::Wlse => {
                let nf = self.n as f64;
                self.least_squares(theta, |i| {
                    (nf + 1.0).powi(2) * (nf + 2.0) / (i * (nf - i + 1.0))
                })
            }
            Method::Crvme => self.cramer_von_mises(theta),
            Method::Mpse => self.neg_mean_log_spacing(theta),
            Method::Pce => self.percentile(theta),
            Method::Ade => self.anderson_darling(theta),
            Method::Rade => self.right_tail_ad(theta),
            Method::Lme => {
                let r = lme_residual(theta, self.l1);
                r * r
            }
        };
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }

    /// ln F(x_i) for every order statistic.
    fn ln_cdf(&self, theta: f64) -> impl Iterator<Item = f64> + '_ {
        self.ln_x.iter().map(move |&lx| {
            let ln_t = -theta * lx;
            ln_t + 1.0 - ln_t.exp()
        })
    }

    fn least_squares(&self, theta: f64, weight: impl Fn(f64) -> f64) -> f64 {
        let n1 = (self.n + 1) as f64;
        self.ln_cdf(theta)
            .enumerate()
            .map(|(k, lf)| {
                let i = (k + 1) as f64;
                weight(i) * (lf.exp() - i / n1).powi(2)
            })
            .sum()
    }

    fn cramer_von_mises(&self, theta: f64) -> f64 {
        let nf = self.n as f64;
        1.0 / (12.0 * nf)
            + self
                .ln_cdf(theta)
                .enumerate()
                .map(|(k, lf)| (lf.exp() - (2.0 * k as f64 + 1.0) / (2.0 * nf)).powi(2))
                .sum::<f64>()
    }

    fn neg_mean_log_spacing(&self, theta: f64) -> f64 {
        // Spacings of F near 0 and of S = 1 − F near 1 to avoid cancellation.
        let mut prev_f = 0.0;
        let mut prev_s = 1.0;
        let mut total = 0.0;
        for lf in self.ln_cdf(theta) {
            let f = lf.exp();
            let s = -lf.exp_m1();
            let d = if f < 0.5 { f - prev_f } else { prev_s - s };
            total += d.ln();
            prev_f = f;
            prev_s = s;
        }
        total += prev_s.ln();
        -total / (self.n + 1) as f64
    }

    fn percentile(&self, theta: f64) -> f64 {
        self.sample
            .sorted()
            .iter()
            .zip(&self.pce_ln_t)
            .map(|(x, lt)| (x - (-lt / theta).exp()).powi(2))
            .sum()
    }

    /// ln F_i and ln S_i for every order statistic.
    fn ln_cdf_sf(&self, theta: f64) -> (Vec<f64>, Vec<f64>) {
        let ln_f: Vec<f64> = self.ln_cdf(theta).collect();
        let ln_s = ln_f.iter().map(|lf| (-lf.exp_m1()).ln()).collect();
        (ln_f, ln_s)
    }

    fn anderson_darling(&self, theta: f64) -> f64 {
        let n = self.n;
        let nf = n as f64;
        let (ln_f, ln_s) = self.ln_cdf_sf(theta);
        let sum: f64 = (0..n)
            .map(|k| (2.0 * k as f64 + 1.0) * (ln_f[k] + ln_s[n - 1 - k]))
            .sum();
        -nf - sum / nf
    }

    fn right_tail_ad(&self, theta: f64) -> f64 {
        let n = self.n;
        let nf = n as f64;
        let (ln_f, ln_s) = self.ln_cdf_sf(theta);
        let sum_f: f64 = ln_f.iter().map(|lf| lf.exp()).sum();
        let sum_s: f64 = (0..n)
            .map(|k| (2.0 * k as f64 + 1.0) * ln_s[n - 1 - k])
            .sum();
        nf / 2.0 - 2.0 * sum_f - sum_s / nf
    }
}

/// Replace exact duplicates by x·(1 + j·1e-12) for the j-th repeat, so
/// spacings stay positive. Deterministic in the sorted index.
fn jitter_ties(sorted: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut run = 0u32;
    for (i, &x) in sorted.iter().enumerate() {
        if i > 0 && x == sorted[i - 1] {
            run += 1;
            out.push((x * (1.0 + run as f64 * TIE_JITTER)).min(f64::from_bits(1f64.to_bits() - 1)));
        } else {
            run = 0;
            out.push(x);
        }
    }
    out
}

fn log_likelihood_ln(ln_x: &[f64], theta: f64) -> f64 {
    let n = ln_x.len() as f64;
    let mut sum = n * theta.ln();
    for &lx in ln_x {
        let ln_t = -theta * lx;
        let t_minus_1 = ln_t.exp_m1();
        sum += -(theta + 1.0) * lx + t_minus_1.ln() - t_minus_1;
    }
    sum
}

fn lme_residual(theta: f64, l1: f64) -> f64 {
    match UnitTeissier::new(theta) {
        Ok(d) => raw_moment(&d, 1) - l1,
        Err(_) => f64::NAN,
    }
}

/// Objective value of `method` at θ; +∞ wherever it is not finite.
pub fn objective(method: Method, theta: f64, s: &Sample) -> Result<f64> {
    Ok(Prepared::new(method, s)?.eval(theta))
}

/// Log-likelihood ℓ(θ).
pub fn log_likelihood(s: &Sample, theta: f64) -> f64 {
    let ln_x: Vec<f64> = s.sorted().iter().map(|x| x.ln()).collect();
    log_likelihood_ln(&ln_x, theta)
}

/// ∂ℓ/∂θ = n/θ − Σ ln x − Σ t ln x/(t − 1) + Σ t ln x with t = x^{−θ}.
pub fn score(s: &Sample, theta: f64) -> f64 {
    let mut sum = s.len() as f64 / theta;
    for &x in s.sorted() {
        let lx = x.ln();
        let ln_t = -theta * lx;
        let t = ln_t.exp();
        sum += -lx - t * lx / ln_t.exp_m1() + t * lx;
    }
    sum
}

/// Wald standard error 1/√(−ℓ″(θ̂)) from a five-point stencil.
pub fn mle_std_error(s: &Sample, theta_hat: f64) -> Result<f64> {
    let ln_x: Vec<f64> = s.sorted().iter().map(|x| x.ln()).collect();
    let h = 1e-4 * theta_hat.max(1.0);
    let d2 = second_derivative(|t| log_likelihood_ln(&ln_x, t), theta_hat, h)?;
    let info = -d2;
    if !(info > 0.0 && info.is_finite()) {
        return Err(Error::NonPositiveInformation(info));
    }
    Ok(info.sqrt().recip())
}

fn log_bracket() -> Bracket {
    Bracket::new(THETA_MIN.ln(), THETA_MAX.ln()).expect("static bracket")
}

fn near_boundary(u: f64, b: &Bracket) -> bool {
    u - b.lo() < BOUNDARY_TOL || b.hi() - u < BOUNDARY_TOL
}

/// Minimize `f(e^u)` over the log bracket: coarse scan, then Brent around the best cell.
fn minimize_log_theta(f: impl Fn(f64) -> f64) -> (f64, f64, bool, usize) {
    let full = log_bracket();
    let step = full.width() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|j| full.lo() + j as f64 * step)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&u| f(u.exp())).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(SCAN_POINTS - 1)];
    let local = Bracket::new(lo, hi).expect("scan cell has positive width");
    let rep = minimize_scalar(|u| f(u.exp()), local, MINIMIZE_TOL);
    let (u, v) = if rep.value <= values[best] {
        (rep.x, rep.value)
    } else {
        (grid[best], values[best])
    };
    let converged = rep.converged && v.is_finite() && !near_boundary(u, &full);
    (u.exp(), v, converged, SCAN_POINTS + rep.iterations)
}

/// Estimate θ by `method`.
pub fn fit(method: Method, s: &Sample) -> Result<FitResult> {
    let prep = Prepared::new(method, s)?;
    if method == Method::Lme {
        if let Some(r) = fit_lme_root(&prep) {
            return Ok(r);
        }
    }
    let (theta_hat, value, converged, iterations) = minimize_log_theta(|t| prep.eval(t));
    let std_error = if method == Method::Mle && converged {
        mle_std_error(s, theta_hat).ok()
    } else {
        None
    };
    Ok(FitResult {
        method,
        theta_hat,
        std_error,
        objective_at_opt: value,
        converged,
        iterations,
    })
}

/// Solve μ₁(θ) = l₁ when the residual changes sign over the bracket.
fn fit_lme_root(prep: &Prepared<'_>) -> Option<FitResult> {
    let full = log_bracket();
    let rep = find_root(|u| lme_residual(u.exp(), prep.l1), full, ROOT_TOL).ok()?;
    let theta_hat = rep.x.exp();
    Some(FitResult {
        method: Method::Lme,
        theta_hat,
        std_error: None,
        objective_at_opt: prep.eval(theta_hat),
        converged: rep.converged && !near_boundary(rep.x, &full),
        iterations: rep.iterations,
    })
}
