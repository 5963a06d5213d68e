//! Scalar numerical machinery: bounded minimization, bracketed root finding,
//! adaptive quadrature and a five-point second derivative.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default interval tolerance for [`minimize_scalar`] on log θ.
pub const MINIMIZE_TOL: f64 = 1e-10;
/// Default tolerance for [`find_root`].
pub const ROOT_TOL: f64 = 1e-12;
/// Default relative tolerance for [`integrate`].
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Panel budget for [`integrate`].
pub const QUAD_MAX_PANELS: usize = 1 << 15;

const MAX_ITER: usize = 500;
const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// A finite search interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Invalid(format!(
                "bracket needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Outcome of a minimization or root search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// Minimizer or root.
    pub x: f64,
    /// Function value at `x`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tolerance_used: f64,
    /// Width of the final enclosing interval.
    pub width: f64,
}

/// Minimize `f` on `bracket` with Brent's golden-section/parabolic hybrid.
///
/// `tol` is an absolute tolerance on the final interval width. The two
/// bracket ends are compared against the interior optimum at exit, so
/// monotone functions report the boundary. After 500 iterations the best
/// point found is returned with `converged = false`.
pub fn minimize_scalar<F>(mut f: F, bracket: Bracket, tol: f64) -> SolverReport
where
    F: FnMut(f64) -> f64,
{
    let tol = if tol > 0.0 { tol } else { MINIMIZE_TOL };
    let clean = |v: f64| if v.is_nan() { f64::INFINITY } else { v };

    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = clean(f(x));
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        let xm = 0.5 * (a + b);
        let tol1 = (0.25 * tol).max(4.0 * f64::EPSILON * x.abs());
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = clean(f(u));

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    for end in [bracket.lo, bracket.hi] {
        let fe = clean(f(end));
        if fe < fx {
            x = end;
            fx = fe;
        }
    }

    SolverReport {
        x,
        value: fx,
        iterations,
        converged,
        tolerance_used: tol,
        width: b - a,
    }
}

/// Brent's bracketed root finder (bisection, secant and inverse quadratic
/// interpolation). Requires `f(lo)·f(hi) ≤ 0`.
pub fn find_root<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<SolverReport>
where
    F: FnMut(f64) -> f64,
{
    let tol = if tol > 0.0 { tol } else { ROOT_TOL };
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !fa.is_finite() {
        return Err(Error::NonFinite(a));
    }
    if !fb.is_finite() {
        return Err(Error::NonFinite(b));
    }
    if fa * fb > 0.0 {
        return Err(Error::NoSignChange {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    if fa == 0.0 {
        return Ok(SolverReport {
            x: a,
            value: 0.0,
            iterations: 0,
            converged: true,
            tolerance_used: tol,
            width: 0.0,
        });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        if fb.signum() == fc.signum() && fb != 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else if xm > 0.0 {
            tol1
        } else {
            -tol1
        };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite(b));
        }
    }

    Ok(SolverReport {
        x: b,
        value: fb,
        iterations,
        converged,
        tolerance_used: tol,
        width: (c - b).abs(),
    })
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::NonFinite(center));
    }
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(Error::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(Error::NonFinite(x2));
        }
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Panel {
        lo,
        hi,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    })
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[lo, hi]`.
///
/// Nodes never touch the endpoints, so integrable endpoint singularities are
/// tolerated. The panel with the largest error estimate is bisected until the
/// summed estimate falls below `rel_tol·|I|`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Invalid(format!(
            "integration needs finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    let rel_tol = if rel_tol > 0.0 { rel_tol } else { QUAD_REL_TOL };

    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, lo, hi)?;
    let (mut total, mut total_err) = (first.value, first.error);
    heap.push(first);

    loop {
        if total_err <= (rel_tol * total.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if heap.len() >= QUAD_MAX_PANELS {
            return Err(Error::Quadrature {
                estimate: total,
                error: total_err,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Panel can no longer be split in double precision.
            heap.push(Panel {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let left = kronrod(&mut f, worst.lo, mid)?;
        let right = kronrod(&mut f, mid, worst.hi)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum from scratch to shed drift from the running updates.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    Ok(panels.iter().map(|p| p.value).sum())
}

/// Five-point central difference estimate of f″(x).
pub fn second_derivative<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if h.is_nan() || h <= 0.0 || !x.is_finite() {
        return Err(Error::Invalid(format!(
            "second derivative needs finite x and h > 0, got x = {x}, h = {h}"
        )));
    }
    let mut eval = |t: f64| {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(t))
        }
    };
    let fm2 = eval(x - 2.0 * h)?;
    let fm1 = eval(x - h)?;
    let f0 = eval(x)?;
    let fp1 = eval(x + h)?;
    let fp2 = eval(x + 2.0 * h)?;
    Ok((-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h))
}
