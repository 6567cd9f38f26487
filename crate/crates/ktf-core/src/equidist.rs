//! Vertical Sato–Tate statistics of Hecke eigenvalues.
//!
//! For a prime `p` and `m1 = m2 = m`, the inferred cuspidal side of the
//! trace formula with `n = p^l` is a weighted sum of `X_l(nu_p)` over Maass
//! forms, where `X_l` is the Chebyshev polynomial with
//! `X_l(2 cos theta) = sin((l + 1) theta) / sin(theta)` and
//! `nu_p = omega'(p)^{1/2} lambda_p`. Normalized by the `l = 0` sum these
//! moments tend to `int X_l dmu`, with `dmu` the Sato–Tate measure times
//! `sum_{l' <= ord_p(m)} X_{2 l'}`.

use crate::arith::{is_prime, ord_p, psi};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::ktf::{KtfContext, KtfRequest};
use crate::transforms::TestFunction;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `X_l(x)` by the three-term recurrence `X_{l+1} = x X_l - X_{l-1}`.
pub fn chebyshev_eval(l: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for _ in 1..l {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// A measure on `[-2, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    /// `dmu_inf = (1/pi) sqrt(1 - x^2/4) dx`.
    SatoTate,
    /// `sum_{l' = 0}^{ord_p(m)} X_{2 l'}(x) dmu_inf(x)`.
    Modified {
        /// The Fourier index `m`.
        m: u64,
        /// The prime `p`.
        p: u64,
    },
}

impl Measure {
    /// Validated modified measure.
    pub fn modified(m: u64, p: u64) -> Result<Self> {
        if m == 0 || !is_prime(p) {
            return Err(Error::InvalidInput(format!("modified measure needs m > 0 and p prime, got m = {m}, p = {p}")));
        }
        Ok(Measure::Modified { m, p })
    }

    /// `ord_p(m)`, zero for the Sato–Tate measure.
    fn order(&self) -> u32 {
        match *self {
            Measure::SatoTate => 0,
            Measure::Modified { m, p } => ord_p(m as i64, p).unwrap_or(0),
        }
    }

    /// Density against `dx` on `[-2, 2]`, zero outside.
    pub fn density(&self, x: f64) -> f64 {
        if x.abs() > 2.0 {
            return 0.0;
        }
        let st = (1.0 - x * x / 4.0).max(0.0).sqrt() / PI;
        st * (0..=self.order()).map(|l| chebyshev_eval(2 * l, x)).sum::<f64>()
    }

    /// `int f dmu` for a polynomial `f` of degree at most `degree`.
    ///
    /// With `x = 2 cos theta`, `dmu_inf = (2/pi) sin^2 theta dtheta` and the
    /// Gauss–Chebyshev rule of the second kind with `k` nodes
    /// `theta_j = j pi / (k + 1)`, weights `2 sin^2 theta_j / (k + 1)`, is
    /// exact up to degree `2k - 1`.
    pub fn integrate_polynomial<F: Fn(f64) -> f64>(&self, degree: u32, f: F) -> f64 {
        let ord = self.order();
        let k = (degree + 2 * ord) / 2 + 2;
        let mut acc = 0.0;
        for j in 1..=k {
            let theta = j as f64 * PI / (k + 1) as f64;
            let s = theta.sin();
            let x = 2.0 * theta.cos();
            let extra: f64 = (0..=ord).map(|l| chebyshev_eval(2 * l, x)).sum();
            acc += 2.0 * s * s / (k + 1) as f64 * f(x) * extra;
        }
        acc
    }
}

/// `int X_i X_j dmu`.
pub fn measure_moment(mu: &Measure, i: u32, j: u32) -> f64 {
    mu.integrate_polynomial(i + j, |x| chebyshev_eval(i, x) * chebyshev_eval(j, x))
}

/// One weighted moment of the normalized eigenvalues.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    /// The level.
    pub level: u64,
    /// The prime `p`.
    pub p: u64,
    /// The exponent `l`.
    pub l: u32,
    /// The Fourier index `m`.
    pub m: u64,
    /// `omega'(p)^{l/2}` on the principal branch.
    pub normalization: Complex64,
    /// `omega'(p)^{l/2} Spec1(n = p^l, m, m)`, an approximation of
    /// `sum_u X_l(nu_p^u) w_u`.
    pub lhs: Complex64,
    /// `J psi(N)` if `l = 2 l'` with `l' <= ord_p(m)`, else zero.
    pub prediction: f64,
    /// `lhs / (J psi(N))`.
    pub ratio: Complex64,
    /// Certified bound on the omitted Kloosterman terms.
    pub tail_bound: f64,
}

/// `omega'(p)^{l/2}` on the principal branch of the square root.
pub fn normalization(omega: &DirichletCharacter, p: u64, l: u32) -> Complex64 {
    omega.eval(p as i64).sqrt().powu(l)
}

/// Weighted `l`-th moment at one level, evaluated against a prepared
/// context.
pub fn moment_report_with(ctx: &KtfContext, req: &KtfRequest, p: u64, l: u32) -> Result<MomentReport> {
    let level = ctx.level();
    let m = req.m1;
    let rep = ctx.report(req)?;
    let norm = normalization(&req.omega, p, l);
    let lhs = norm * rep.spec_cuspidal_inferred;
    let jpsi = ctx.j() * psi(level) as f64;
    let ord = ord_p(m as i64, p).unwrap_or(0);
    let prediction = if l % 2 == 0 && l / 2 <= ord { jpsi } else { 0.0 };
    Ok(MomentReport { level, p, l, m, normalization: norm, lhs, prediction, ratio: lhs / jpsi, tail_bound: rep.tail_bound })
}

fn check_moment_args(level: u64, p: u64, l: u32, m: u64) -> Result<u64> {
    if !is_prime(p) || level % p == 0 {
        return Err(Error::InvalidInput(format!("p = {p} must be a prime not dividing N = {level}")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    p.checked_pow(l).ok_or_else(|| Error::InvalidInput(format!("p^l = {p}^{l} overflows")))
}

/// Weighted `l`-th moment of `nu_p` at level `N`, from the trace formula
/// with `n = p^l` and `m1 = m2 = m`.
pub fn moment_report(
    level: u64,
    omega: &DirichletCharacter,
    p: u64,
    l: u32,
    m: u64,
    h: &TestFunction,
) -> Result<MomentReport> {
    let n = check_moment_args(level, p, l, m)?;
    let ctx = KtfContext::new(level, omega, h)?;
    let req = KtfRequest::new(level, omega.clone(), n, m, m, h.clone())?;
    moment_report_with(&ctx, &req, p, l)
}

/// One row of an equidistribution scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    /// The level.
    #[serde(rename = "N")]
    pub level: u64,
    /// The prime.
    pub p: u64,
    /// The Fourier index.
    pub m: u64,
    /// The exponent.
    pub l: u32,
    /// Real part of `moment(l) / moment(0)`.
    pub ratio_re: f64,
    /// Imaginary part of `moment(l) / moment(0)`.
    pub ratio_im: f64,
    /// `int X_l dmu` for the modified measure of `(m, p)`.
    pub prediction: f64,
}

/// For each level (trivial nebentypus) and `l <= max_l`, the ratio of the
/// `l`-th weighted moment to the `0`-th, with the limit it should approach.
/// Rows are sorted by `(N, l)`.
pub fn equidist_scan(p: u64, m: u64, h: &TestFunction, levels: &[u64], max_l: u32) -> Result<Vec<ScanRow>> {
    equidist_scan_with(p, m, h, levels, max_l, None)
}

/// [`equidist_scan`] with explicit tolerances for every request.
pub fn equidist_scan_with(
    p: u64,
    m: u64,
    h: &TestFunction,
    levels: &[u64],
    max_l: u32,
    tolerances: Option<(f64, f64)>,
) -> Result<Vec<ScanRow>> {
    let mu = Measure::modified(m, p)?;
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::new();
    for level in sorted {
        let omega = DirichletCharacter::principal(level)?;
        let ctx = KtfContext::new(level, &omega, h)?;
        let mut base = None;
        for l in 0..=max_l {
            let n = check_moment_args(level, p, l, m)?;
            let mut req = KtfRequest::new(level, omega.clone(), n, m, m, h.clone())?;
            if let Some((a, r)) = tolerances {
                req = req.with_tolerances(a, r)?;
            }
            let rep = moment_report_with(&ctx, &req, p, l)?;
            let b = *base.get_or_insert(rep.lhs);
            let ratio = if l == 0 { Complex64::new(1.0, 0.0) } else { rep.lhs / b };
            rows.push(ScanRow {
                level,
                p,
                m,
                l,
                ratio_re: ratio.re,
                ratio_im: ratio.im,
                prediction: measure_moment(&mu, l, 0),
            });
        }
    }
    Ok(rows)
}
