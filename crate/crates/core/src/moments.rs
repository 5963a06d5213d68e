//! Raw moments, single moments of order statistics, and L-moments.
//!
//! Every order-statistic moment is built from the moments of sample maxima,
//!
//! μ^{(k)}_{i:i} = e^i / i^{i−k/θ} · [Γ(i − k/θ + 1, i) − i·Γ(i − k/θ, i)],
//!
//! either through the alternating sum over maxima (`os_moment_maxima`) or the
//! binomial expansion of the order-statistic density (`os_moment_expansion`).

use serde::{Deserialize, Serialize};

use crate::dist::UnitTeissier;
use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::specfun::upper_incomplete_gamma;

/// Largest sample size accepted by the order-statistic formulas. The
/// alternating sums lose roughly log10(2^n) digits to cancellation.
pub const MAX_ORDER_N: usize = 64;

/// Identifies μ^{(k)}_{r:n}, the k-th moment of the r-th order statistic out of n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderStatIndex {
    n: usize,
    r: usize,
    k: u32,
}

impl OrderStatIndex {
    pub fn new(n: usize, r: usize, k: u32) -> Result<Self> {
        if n == 0 || n > MAX_ORDER_N {
            return Err(Error::Invalid(format!(
                "sample size must be in 1..={MAX_ORDER_N}, got {n}"
            )));
        }
        if r == 0 || r > n {
            return Err(Error::Invalid(format!("rank must be in 1..={n}, got {r}")));
        }
        if k == 0 {
            return Err(Error::Invalid("moment order must be at least 1".into()));
        }
        Ok(Self { n, r, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// λ₁..λ₄ with L-CV = λ₂/λ₁, τ₃ = λ₃/λ₂ and τ₄ = λ₄/λ₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LMomentSet {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub l_cv: f64,
    pub tau3: f64,
    pub tau4: f64,
}

/// First two sample L-moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleLMoments {
    pub l1: f64,
    pub l2: f64,
}

fn gamma(a: f64, b: f64) -> f64 {
    upper_incomplete_gamma(a, b).expect("b is a positive integer")
}

/// E(X^k) = e·[Γ(2 − k/θ, 1) − Γ(1 − k/θ, 1)].
pub fn raw_moment(d: &UnitTeissier, k: u32) -> f64 {
    let s = k as f64 / d.theta();
    std::f64::consts::E * (gamma(2.0 - s, 1.0) - gamma(1.0 - s, 1.0))
}

/// μ^{(k)}_{i:i}, the k-th moment of the maximum of `i` draws.
pub fn maxima_moment(d: &UnitTeissier, i: usize, k: u32) -> f64 {
    let fi = i as f64;
    let a = fi - k as f64 / d.theta();
    // e^i / i^a computed in log space so large i cannot overflow.
    let ln_scale = fi - a * fi.ln();
    let upper = (ln_scale + gamma(a + 1.0, fi).ln()).exp();
    let lower = (ln_scale + fi.ln() + gamma(a, fi).ln()).exp();
    upper - lower
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|j| ((n - j) as f64).ln() - ((j + 1) as f64).ln())
        .sum()
}

/// Neumaier summation after ordering terms by decreasing magnitude.
fn compensated_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn signed(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// μ^{(k)}_{r:n} as an alternating sum of maxima moments:
/// Σ_{i=r}^{n} (−1)^{i−r} C(i−1, r−1) C(n, i) μ^{(k)}_{i:i}.
pub fn os_moment_maxima(d: &UnitTeissier, idx: OrderStatIndex) -> f64 {
    let (n, r, k) = (idx.n, idx.r, idx.k);
    let terms = (r..=n)
        .map(|i| {
            let weight = (ln_binomial(i - 1, r - 1) + ln_binomial(n, i)).exp();
            signed(i - r) * weight * maxima_moment(d, i, k)
        })
        .collect();
    compensated_sum(terms)
}

/// μ^{(k)}_{r:n} from the binomial expansion of [1 − F]^{n−r}:
/// n Σ_{i=0}^{n−r} (−1)^i C(n−1, r−1) C(n−r, i) · e^j / j^{j−k/θ+1}
/// · [Γ(j − k/θ + 1, j) − j·Γ(j − k/θ, j)] with j = i + r.
pub fn os_moment_expansion(d: &UnitTeissier, idx: OrderStatIndex) -> f64 {
    let (n, r, k) = (idx.n, idx.r, idx.k);
    let s = k as f64 / d.theta();
    let ln_outer = (n as f64).ln() + ln_binomial(n - 1, r - 1);
    let terms = (0..=n - r)
        .map(|i| {
            let j = (i + r) as f64;
            let a = j - s;
            let ln_pref = ln_outer + ln_binomial(n - r, i) + j - (a + 1.0) * j.ln();
            let first = (ln_pref + gamma(a + 1.0, j).ln()).exp();
            let second = (ln_pref + j.ln() + gamma(a, j).ln()).exp();
            signed(i) * (first - second)
        })
        .collect();
    compensated_sum(terms)
}

pub use os_moment_expansion as os_moment_t22;
pub use os_moment_maxima as os_moment_t21;

/// V(X_{r:n}) = μ^{(2)}_{r:n} − (μ^{(1)}_{r:n})².
pub fn os_variance(d: &UnitTeissier, n: usize, r: usize) -> Result<f64> {
    let m1 = os_moment_maxima(d, OrderStatIndex::new(n, r, 1)?);
    let m2 = os_moment_maxima(d, OrderStatIndex::new(n, r, 2)?);
    Ok((m2 - m1 * m1).max(0.0))
}

pub fn l_moments(d: &UnitTeissier) -> LMomentSet {
    let mu: Vec<f64> = (1..=4).map(|i| maxima_moment(d, i, 1)).collect();
    let lambda1 = mu[0];
    let lambda2 = mu[1] - mu[0];
    let lambda3 = 2.0 * mu[2] - 3.0 * mu[1] + mu[0];
    let lambda4 = 5.0 * mu[3] - 10.0 * mu[2] + 6.0 * mu[1] - mu[0];
    LMomentSet {
        lambda1,
        lambda2,
        lambda3,
        lambda4,
        l_cv: lambda2 / lambda1,
        tau3: lambda3 / lambda2,
        tau4: lambda4 / lambda2,
    }
}

/// l₁ = x̄ and the unbiased l₂ = 2b₁ − b₀ with b₁ = Σ(i−1)x_{i:n} / (n(n−1)).
pub fn sample_l_moments(s: &Sample) -> Result<SampleLMoments> {
    let n = s.len();
    if n < 2 {
        return Err(Error::Invalid(format!(
            "the second sample L-moment needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let b0 = s.mean();
    let b1 = s
        .sorted()
        .iter()
        .enumerate()
        .map(|(i, x)| i as f64 * x)
        .sum::<f64>()
        / (nf * (nf - 1.0));
    Ok(SampleLMoments {
        l1: b0,
        l2: 2.0 * b1 - b0,
    })
}
