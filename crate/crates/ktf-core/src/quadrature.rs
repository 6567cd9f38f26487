//! Numerical integration of complex-valued functions of a real variable
//!
//! Three schemes share one interface: adaptive Gauss–Kronrod (7/15 points),
//! tanh-sinh with step halving, and the truncated trapezoid rule (which is
//! spectrally accurate for smooth integrands decaying at both ends). Fixed
//! composite Gauss–Legendre rules are exposed separately for inner loops.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Globally adaptive Gauss–Kronrod 7/15 bisection.
    GaussKronrod,
    /// Double-exponential substitution with step halving.
    TanhSinh,
    /// Trapezoid rule on a finite interval with step halving.
    Trapezoid,
}

/// An integration rule with its tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Scheme used by [`Quadrature::integrate`].
    pub scheme: Scheme,
    /// Absolute tolerance, positive.
    pub abs_tol: f64,
    /// Relative tolerance, positive.
    pub rel_tol: f64,
    /// Maximal number of bisections (Gauss–Kronrod) or halvings.
    pub max_depth: u32,
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    /// Integral estimate.
    pub value: Complex64,
    /// Estimated absolute error.
    pub error: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { scheme: Scheme::GaussKronrod, abs_tol: 1e-12, rel_tol: 1e-10, max_depth: 2000 }
    }
}

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

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

impl Quadrature {
    /// Validated constructor.
    pub fn new(scheme: Scheme, abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(Quadrature { scheme, abs_tol, rel_tol, max_depth })
    }

    fn target(&self, v: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * v.norm())
    }

    /// Integrate `f` over `[a, b]`; `b` may be `f64::INFINITY` (mapped by
    /// `x = a + u / (1 - u)` for Gauss–Kronrod and tanh-sinh).
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        if b.is_infinite() {
            if self.scheme == Scheme::Trapezoid {
                return Err(Error::InvalidInput("trapezoid scheme needs a finite interval".into()));
            }
            let g = |u: f64| {
                if u >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let d = 1.0 - u;
                f(a + u / d) / (d * d)
            };
            return self.finite(&g, 0.0, 1.0);
        }
        self.finite(&f, a, b)
    }

    fn finite(&self, f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> Result<Estimate> {
        match self.scheme {
            Scheme::GaussKronrod => self.adaptive(&f, a, b),
            Scheme::TanhSinh => self.tanh_sinh(&f, a, b),
            Scheme::Trapezoid => self.trapezoid(&f, a, b),
        }
    }

    fn adaptive<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Result<Estimate> {
        let (v, e) = gk15(f, a, b);
        let mut parts = vec![(a, b, v, e)];
        let mut total = v;
        let mut err = e;
        let mut iter = 0;
        while err > self.target(total) {
            iter += 1;
            if iter > self.max_depth {
                return Err(Error::Tolerance(format!(
                    "Gauss-Kronrod did not converge: error {err:.3e} after {iter} bisections"
                )));
            }
            let (idx, _) = parts
                .iter()
                .enumerate()
                .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
                .expect("nonempty");
            let (pa, pb, pv, pe) = parts.swap_remove(idx);
            let m = 0.5 * (pa + pb);
            let (v1, e1) = gk15(f, pa, m);
            let (v2, e2) = gk15(f, m, pb);
            total += v1 + v2 - pv;
            err += e1 + e2 - pe;
            parts.push((pa, m, v1, e1));
            parts.push((m, pb, v2, e2));
        }
        // recompute sums to shed accumulated cancellation
        let value = parts.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.2);
        let error = parts.iter().map(|p| p.3).sum();
        Ok(Estimate { value, error })
    }

    fn tanh_sinh<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Result<Estimate> {
        let c = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let tmax = 3.2;
        let node = |t: f64| -> Complex64 {
            let s = std::f64::consts::FRAC_PI_2 * t.sinh();
            let x = s.tanh();
            let w = std::f64::consts::FRAC_PI_2 * t.cosh() / (s.cosh() * s.cosh());
            let dist = 1.0 - x.abs();
            if dist <= 0.0 || w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            f(c + hw * x) * (w * hw)
        };
        let mut h = 1.0;
        let mut sum = node(0.0);
        let mut k = 1;
        while (k as f64) * h <= tmax {
            let t = k as f64 * h;
            sum += node(t) + node(-t);
            k += 1;
        }
        let mut prev = sum * h;
        for _ in 0..self.max_depth.min(12) {
            h *= 0.5;
            let mut k = 1;
            while (k as f64) * h <= tmax {
                let t = k as f64 * h;
                sum += node(t) + node(-t);
                k += 2;
            }
            let cur = sum * h;
            let err = (cur - prev).norm();
            if err <= self.target(cur) {
                return Ok(Estimate { value: cur, error: err });
            }
            prev = cur;
        }
        Err(Error::Tolerance("tanh-sinh did not converge".into()))
    }

    fn trapezoid<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Result<Estimate> {
        let mut n = 16usize;
        let mut h = (b - a) / n as f64;
        let mut sum = (f(a) + f(b)) * 0.5;
        for i in 1..n {
            sum += f(a + i as f64 * h);
        }
        let mut prev = sum * h;
        for _ in 0..self.max_depth.min(20) {
            for i in 0..n {
                sum += f(a + (i as f64 + 0.5) * h);
            }
            n *= 2;
            h *= 0.5;
            let cur = sum * h;
            let err = (cur - prev).norm();
            if err <= self.target(cur) {
                return Ok(Estimate { value: cur, error: err });
            }
            prev = cur;
        }
        Err(Error::Tolerance("trapezoid rule did not converge".into()))
    }
}

/// Shared nodes and weights of one Gauss-Legendre rule.
pub type GaussLegendreRule = Arc<(Vec<f64>, Vec<f64>)>;

thread_local! {
    static GL_CACHE: RefCell<HashMap<usize, GaussLegendreRule>> = RefCell::new(HashMap::new());
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(n: usize) -> GaussLegendreRule {
    GL_CACHE.with(|c| {
        c.borrow_mut()
            .entry(n)
            .or_insert_with(|| Arc::new(gauss_legendre_uncached(n)))
            .clone()
    })
}

fn gauss_legendre_uncached(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule with `panels` equal panels of `order` points.
pub fn composite_gl<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let rule = gauss_legendre(order);
    let (xs, ws) = (&rule.0, &rule.1);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in xs.iter().zip(ws.iter()) {
            s += f(c + 0.5 * h * x) * *w;
        }
        total += s * (0.5 * h);
    }
    total
}

/// Real-valued convenience wrapper around [`composite_gl`].
pub fn composite_gl_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    composite_gl(|x| Complex64::new(f(x), 0.0), a, b, panels, order).re
}
