//! Special functions: the upper incomplete gamma function for any real first
//! argument, the exponential integral E₁, and the W₋₁ branch of Lambert W.

use std::f64::consts::E;

use crate::error::{domain, Result};

const EPS: f64 = f64::EPSILON;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The arguments of Γ(a, b). `b` must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaArgs {
    a: f64,
    b: f64,
}

impl GammaArgs {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return domain(format!(
                "incomplete gamma needs finite arguments, got ({a}, {b})"
            ));
        }
        if b <= 0.0 {
            return domain(format!("incomplete gamma needs b > 0, got b = {b}"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Γ(a, b) = ∫_b^∞ t^{a−1} e^{−t} dt.
    pub fn eval(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if use_continued_fraction(a, b) {
            (a * b.ln() - b).exp() * continued_fraction(a, b)
        } else if a > 0.0 {
            series_complement(a, b)
        } else {
            downward_recurrence(a, b)
        }
    }

    /// e^{b} b^{−a} Γ(a, b), which stays O(1/b) for large b where Γ itself underflows.
    pub fn eval_scaled(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if use_continued_fraction(a, b) {
            continued_fraction(a, b)
        } else {
            self.eval() * (b - a * b.ln()).exp()
        }
    }
}

/// Upper incomplete gamma function Γ(a, b) for real `a` and `b > 0`.
///
/// The integral converges for every real `a` once `b > 0`, so negative and
/// zero first arguments are accepted. Results can overflow or underflow at
/// the extremes (for example a = −50 with b = 1e-8) like any f64 function.
pub fn upper_incomplete_gamma(a: f64, b: f64) -> Result<f64> {
    Ok(GammaArgs::new(a, b)?.eval())
}

/// Scaled form e^{b} b^{−a} Γ(a, b).
pub fn upper_incomplete_gamma_scaled(a: f64, b: f64) -> Result<f64> {
    Ok(GammaArgs::new(a, b)?.eval_scaled())
}

/// Exponential integral E₁(b) = Γ(0, b) for b > 0.
pub fn exp_integral_e1(b: f64) -> Result<f64> {
    if !b.is_finite() || b <= 0.0 {
        return domain(format!("E1 needs finite b > 0, got {b}"));
    }
    Ok(e1(b))
}

fn use_continued_fraction(a: f64, b: f64) -> bool {
    if a > 0.0 {
        b >= a + 1.0
    } else {
        b >= 1.0
    }
}

// Modified Lentz evaluation of the Legendre continued fraction for
// e^{b} b^{−a} Γ(a, b); converges for every real a when b > 0.
fn continued_fraction(a: f64, b: f64) -> f64 {
    let mut bb = b + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / bb;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let i = i as f64;
        let an = -i * (i - a);
        bb += 2.0;
        d = an * d + bb;
        if d.abs() < TINY {
            d = TINY;
        }
        c = bb + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

// Γ(a) − γ(a, b) with the lower function from its power series; a > 0.
fn series_complement(a: f64, b: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= b / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    let lower = sum * (a * b.ln() - b).exp();
    libm::tgamma(a) - lower
}

// a ≤ 0 and b < 1: Γ(s, b) = (Γ(s + 1, b) − b^s e^{−b}) / s applied downward
// from a start in [1, 2), or from E₁ when a is a non-positive integer.
fn downward_recurrence(a: f64, b: f64) -> f64 {
    let nearest = a.round();
    let (mut s, mut g) = if (a - nearest).abs() < 1e-12 {
        (0.0, e1(b))
    } else {
        let steps = (1.0 - a).ceil();
        let start = a + steps;
        (start, series_complement(start, b))
    };
    let target = if (a - nearest).abs() < 1e-12 {
        nearest
    } else {
        a
    };
    let ln_b = b.ln();
    while s > target + 0.5 {
        s -= 1.0;
        g = (g - (s * ln_b - b).exp()) / s;
    }
    g
}

fn e1(b: f64) -> f64 {
    if b >= 1.0 {
        return (-b).exp() * continued_fraction(0.0, b);
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= -b / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - b.ln() - sum
}

/// Lower real branch W₋₁ of the Lambert W function on [−1/e, 0).
///
/// Returns w ≤ −1 with w·e^w = z. Inputs within 1e-14 of the branch point
/// return exactly −1.
pub fn lambert_w_m1(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if !z.is_finite() || z >= 0.0 || z < branch - 1e-14 {
        return domain(format!("W_-1 is defined on [-1/e, 0), got {z}"));
    }
    if (z - branch).abs() <= 1e-14 {
        return Ok(-1.0);
    }

    let mut w = if z < -0.25 {
        let p = -(2.0 * (1.0 + E * z)).max(0.0).sqrt();
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 - p * 43.0 / 540.0)))
    } else {
        let l1 = (-z).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    w = w.min(-1.0);

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = (w - step).min(-1.0);
        let done = (next - w).abs() <= 4.0 * EPS * w.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(upper_incomplete_gamma(1.0, 1.0).unwrap(), (-1.0f64).exp()) < 1e-15);
        // 30-digit reference values
        assert!(
            rel(
                upper_incomplete_gamma(0.5, 1.0).unwrap(),
                0.278_805_585_280_661_98
            ) < 1e-13
        );
        assert!(
            rel(
                upper_incomplete_gamma(-0.5, 1.0).unwrap(),
                0.178_147_711_781_560_69
            ) < 1e-13
        );
        assert!(rel(exp_integral_e1(1.0).unwrap(), 0.219_383_934_395_520_27) < 1e-14);
        assert!(
            rel(
                upper_incomplete_gamma(0.0, 2.0).unwrap(),
                0.048_900_510_708_061_12
            ) < 1e-14
        );
    }

    #[test]
    fn gamma_small_b_negative_a() {
        // 25-digit references
        assert!(
            rel(
                upper_incomplete_gamma(-0.5, 0.1).unwrap(),
                3.401_769_336_691_615_3
            ) < 1e-12
        );
        assert!(
            rel(
                upper_incomplete_gamma(-2.0, 0.5).unwrap(),
                0.886_417_457_100_713_8
            ) < 1e-12
        );
    }

    #[test]
    fn gamma_reference_grid() {
        // (a, b, Γ(a, b)) from 25-digit arithmetic
        let table = [
            (-5.5, 0.1, 50_900.181_612_958_244),
            (-5.5, 1.0, 0.055_155_508_766_410_801),
            (-5.5, 5.0, 8.784_788_319_546_274_3e-8),
            (-5.5, 20.0, 5.483_040_627_418_833_3e-18),
            (-2.3, 0.1, 73.327_716_872_048_503),
            (-2.3, 1.0, 0.101_445_832_932_052_38),
            (-2.3, 5.0, 2.090_959_824_217_380_6e-5),
            (-2.3, 20.0, 9.054_301_812_346_507_2e-14),
            (-0.5, 5.0, 4.773_964_866_727_084_6e-4),
            (-0.5, 20.0, 2.150_102_771_303_453_6e-11),
            (0.7, 0.1, 1.024_394_016_865_486_2),
            (0.7, 1.0, 0.309_991_678_736_821_14),
            (0.7, 5.0, 3.954_190_713_039_183_7e-3),
            (0.7, 20.0, 8.272_268_640_150_499_3e-10),
            (3.2, 0.1, 2.423_782_738_471_780_0),
            (3.2, 1.0, 2.275_384_293_685_835_0),
            (3.2, 5.0, 0.360_080_891_753_377_81),
            (3.2, 20.0, 1.676_095_268_692_403_8e-6),
        ];
        for (a, b, want) in table {
            let got = upper_incomplete_gamma(a, b).unwrap();
            assert!(rel(got, want) < 1e-12, "Γ({a}, {b}) = {got}, want {want}");
        }
    }

    #[test]
    fn gamma_domain_errors() {
        assert!(upper_incomplete_gamma(1.0, 0.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
        assert!(upper_incomplete_gamma(f64::NAN, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn scaled_matches_unscaled() {
        for &(a, b) in &[(0.3, 5.0), (-2.5, 3.0), (1.7, 0.5), (-0.5, 0.2)] {
            let g = upper_incomplete_gamma(a, b).unwrap();
            let s = upper_incomplete_gamma_scaled(a, b).unwrap();
            assert!(rel(s * (a * f64::ln(b) - b).exp(), g) < 1e-13);
        }
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w_m1(-1.0 / E).unwrap(), -1.0);
        assert!((lambert_w_m1(-0.1).unwrap() + 3.577_152_063_957_297).abs() < 1e-12);
        assert!((lambert_w_m1(-0.183_939_72).unwrap() + 2.678_346_995_098_260_7).abs() < 1e-12);
    }

    #[test]
    fn lambert_domain() {
        assert!(lambert_w_m1(0.0).is_err());
        assert!(lambert_w_m1(0.1).is_err());
        assert!(lambert_w_m1(-0.5).is_err());
        assert!(lambert_w_m1(f64::NAN).is_err());
    }
}
