//! Truncated-moment characterization of the unit Teissier law.
//!
//! With b = x^{−θ} and G(b) = Γ(2 − 1/θ, b) − Γ(1 − 1/θ, b):
//!
//! * g(x) = x^{1+2θ} e^{b} / (θ(1 − x^θ)) · G(b), so that E(X | X ≤ x) = g(x)·f(x)/F(x);
//! * h(x) = x^{1+2θ} e^{b} / (θ(1 − x^θ)) · [G(1) − G(b)], so that
//!   E(X | X ≥ x) = h(x)·f(x)/(1 − F(x)).
//!
//! Both functions are evaluated in log space: e^{b} overflows long before
//! the products g·f and h·f stop being meaningful.

use serde::{Deserialize, Serialize};

use crate::dist::UnitTeissier;
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate, QUAD_REL_TOL};
use crate::specfun::{upper_incomplete_gamma, upper_incomplete_gamma_scaled};

/// Beyond this b = x^{−θ} the gamma difference is taken from the scaled form.
const B_LITERAL_MAX: f64 = 700.0;
/// Upper cap on x; 1/(1 − x^θ) is singular at x = 1.
pub const X_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// g(x)·f(x) against ∫₀ˣ t f(t) dt.
    Lower,
    /// h(x)·f(x) against ∫ₓ¹ t f(t) dt.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMomentCheck {
    pub side: Side,
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_gap: f64,
}

impl TruncatedMomentCheck {
    fn new(side: Side, x: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            side,
            x,
            lhs,
            rhs,
            abs_gap: (lhs - rhs).abs(),
        }
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= X_MAX) {
        return domain(format!(
            "characterization functions need x in (0, {X_MAX}], got {x}"
        ));
    }
    Ok(())
}

fn gamma(a: f64, b: f64) -> f64 {
    upper_incomplete_gamma(a, b).expect("b >= 1")
}

/// ln G(b) for b = x^{−θ} ≥ 1.
fn ln_gamma_difference(theta: f64, b: f64) -> f64 {
    let a = 1.0 - 1.0 / theta;
    if b <= B_LITERAL_MAX {
        (gamma(a + 1.0, b) - gamma(a, b)).ln()
    } else {
        // G(b) = b^a e^{−b} (1 − S(a, b)/θ) with S the scaled upper gamma.
        let s = upper_incomplete_gamma_scaled(a, b).expect("b >= 1");
        a * b.ln() - b + (1.0 - s / theta).ln()
    }
}

/// ln of the common prefactor x^{1+2θ} e^{b} / (θ(1 − x^θ)).
fn ln_prefactor(theta: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    let b = (-theta * ln_x).exp();
    (1.0 + 2.0 * theta) * ln_x + b - theta.ln() - (-(theta * ln_x).exp_m1()).ln()
}

/// ln g(x).
pub fn ln_g(d: &UnitTeissier, x: f64) -> Result<f64> {
    check_x(x)?;
    let theta = d.theta();
    let b = (-theta * x.ln()).exp();
    if b > B_LITERAL_MAX {
        // e^{b} cancels against e^{−b} inside G; combine the logs directly.
        let a = 1.0 - 1.0 / theta;
        let s = upper_incomplete_gamma_scaled(a, b).expect("b >= 1");
        let ln_x = x.ln();
        return Ok(
            (1.0 + 2.0 * theta) * ln_x - theta.ln() - (-(theta * ln_x).exp_m1()).ln()
                + a * b.ln()
                + (1.0 - s / theta).ln(),
        );
    }
    Ok(ln_prefactor(theta, x) + ln_gamma_difference(theta, b))
}

/// ln h(x).
pub fn ln_h(d: &UnitTeissier, x: f64) -> Result<f64> {
    check_x(x)?;
    let theta = d.theta();
    let b = (-theta * x.ln()).exp();
    let a = 1.0 - 1.0 / theta;
    let total = gamma(a + 1.0, 1.0) - gamma(a, 1.0);
    let partial = ln_gamma_difference(theta, b).exp();
    Ok(ln_prefactor(theta, x) + (total - partial).ln())
}

/// g(x) from the lower truncated-moment identity.
pub fn g_fn(d: &UnitTeissier, x: f64) -> Result<f64> {
    Ok(ln_g(d, x)?.exp())
}

/// h(x) from the upper truncated-moment identity. Grows like e^{x^{−θ}} as
/// x → 0 and reports [`Error::Overflow`] once it leaves the f64 range; use
/// [`upper_partial_mean`] for the product h·f.
pub fn h_fn(d: &UnitTeissier, x: f64) -> Result<f64> {
    let v = ln_h(d, x)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(format!("h({x}) exceeds the double range")))
    }
}

/// g(x)·f(x) = ∫₀ˣ t f(t) dt.
pub fn lower_partial_mean(d: &UnitTeissier, x: f64) -> Result<f64> {
    Ok((ln_g(d, x)? + d.log_pdf(x)?).exp())
}

/// h(x)·f(x) = ∫ₓ¹ t f(t) dt.
pub fn upper_partial_mean(d: &UnitTeissier, x: f64) -> Result<f64> {
    Ok((ln_h(d, x)? + d.log_pdf(x)?).exp())
}

/// `m` equally spaced points from 0.01 to 0.99.
pub fn default_grid(m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..m)
            .map(|j| 0.01 + 0.98 * j as f64 / (m - 1) as f64)
            .collect(),
    }
}

/// Compare g·f and h·f with quadrature of t·f(t) at every grid point.
pub fn verify_characterization(
    d: &UnitTeissier,
    grid: &[f64],
) -> Result<Vec<TruncatedMomentCheck>> {
    verify_with(d, grid, |x| ln_g(d, x), |x| ln_h(d, x))
}

/// As [`verify_characterization`] but with caller-supplied ln g and ln h,
/// e.g. to confirm that a perturbed candidate is rejected.
pub fn verify_with<G, H>(
    d: &UnitTeissier,
    grid: &[f64],
    ln_g_fn: G,
    ln_h_fn: H,
) -> Result<Vec<TruncatedMomentCheck>>
where
    G: Fn(f64) -> Result<f64>,
    H: Fn(f64) -> Result<f64>,
{
    let weighted = |t: f64| t * d.pdf(t);
    let mut out = Vec::with_capacity(2 * grid.len());
    for &x in grid {
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("grid point {x} is outside (0, 1)"));
        }
        let ln_f = d.log_pdf(x)?;
        let below = integrate(weighted, 0.0, x, QUAD_REL_TOL)?;
        let above = integrate(weighted, x, 1.0, QUAD_REL_TOL)?;
        out.push(TruncatedMomentCheck::new(
            Side::Lower,
            x,
            (ln_g_fn(x)? + ln_f).exp(),
            below,
        ));
        out.push(TruncatedMomentCheck::new(
            Side::Upper,
            x,
            (ln_h_fn(x)? + ln_f).exp(),
            above,
        ));
    }
    Ok(out)
}

/// Largest gap across a set of checks.
pub fn max_gap(checks: &[TruncatedMomentCheck]) -> f64 {
    checks.iter().map(|c| c.abs_gap).fold(0.0, f64::max)
}
