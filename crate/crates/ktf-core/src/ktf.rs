//! The Kuznetsov trace formula for `Gamma_0(N)` with nebentypus `omega'`.
//!
//! For a request `(N, omega', n, m1, m2, h)` the computable sides are
//!
//! * `Geo1 = T(m1, m2, n) psi(N) conj(omega'(m1 / b)) J` with
//!   `J = (1/pi^2) int h(t) tanh(pi t) t dt`,
//! * `Geo2 = (2 i psi(N) / pi) sum_{c in N Z^+} S_{omega'}(m2, m1; n; c) / c
//!   * int J_{2it}(4 pi sqrt(n m1 m2) / c) h(t) t / cosh(pi t) dt`,
//! * `Spec2`, the continuous contribution of the Eisenstein basis,
//!
//! and the cuspidal side is inferred as `Spec1 = Geo1 + Geo2 - Spec2`.
//!
//! Since `J_{-2it}(x)` is the conjugate of `J_{2it}(x)` for real `x`, the
//! t-integral of the Kloosterman term equals `2 i I(x)` with
//! `I(x) = int_0^inf Im J_{2it}(x) h(t) t / cosh(pi t) dt`, so that
//! `Geo2 = -(4 psi(N) / pi) sum_c S(c) I(x_c) / c`.

use crate::arith::{self, divisors, gcd, psi, tau};
use crate::characters::DirichletCharacter;
use crate::eisenstein::{enumerate_basis, lambda_n_eis, sigma_coefficients, EisensteinBasisElement};
use crate::eisenstein::{dirichlet_l, LVariant};
use crate::error::{Error, Result};
use crate::expsums::{kloosterman, CompensatedSum, KloostermanMode, KloostermanQuery};
use crate::quadrature::gauss_legendre;
use crate::specfun::JOrder;
use crate::transforms::{spectral_moment, TestFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Read;
use std::sync::OnceLock;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Default absolute tolerance of a request.
pub const DEFAULT_ABS_TOL: f64 = 1e-8;
/// Default relative tolerance of a request, measured against `psi(N)`.
pub const DEFAULT_REL_TOL: f64 = 2e-3;
/// Largest number of Kloosterman terms the certified truncation may use.
pub const MAX_C_TERMS: u64 = 200_000;
/// Smallest number of Kloosterman terms summed under the certified truncation.
pub const MIN_C_TERMS: u64 = 64;
/// Width of the Gauss–Legendre panels of every t-integral.
const T_PANEL: f64 = 0.25;
/// Order of the Gauss–Legendre panels.
const T_ORDER: usize = 16;

/// One evaluation of the trace formula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KtfRequest {
    /// The level `N`.
    pub level: u64,
    /// Nebentypus `omega'` modulo `N`, even.
    pub omega: DirichletCharacter,
    /// Hecke index `n`, prime to `N`.
    pub n: u64,
    /// First Fourier index.
    pub m1: u64,
    /// Second Fourier index.
    pub m2: u64,
    /// The test function.
    pub h: TestFunction,
    /// Absolute tolerance.
    pub abs_tol: f64,
    /// Tolerance relative to `psi(N)`.
    pub rel_tol: f64,
}

impl KtfRequest {
    /// Validated request with default tolerances.
    pub fn new(level: u64, omega: DirichletCharacter, n: u64, m1: u64, m2: u64, h: TestFunction) -> Result<Self> {
        let req = Self { level, omega, n, m1, m2, h, abs_tol: DEFAULT_ABS_TOL, rel_tol: DEFAULT_REL_TOL };
        req.validate()?;
        Ok(req)
    }

    /// Replace the tolerances.
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self.validate()?;
        Ok(self)
    }

    /// Check the hypotheses of the formula.
    pub fn validate(&self) -> Result<()> {
        if self.level == 0 || self.omega.modulus() != self.level {
            return Err(Error::InvalidInput(format!(
                "nebentypus modulus {} does not match level {}",
                self.omega.modulus(),
                self.level
            )));
        }
        if self.omega.parity() != 1 {
            return Err(Error::InvalidInput("the nebentypus must satisfy omega'(-1) = 1".into()));
        }
        if self.n == 0 || gcd(self.n as i64, self.level as i64) != 1 {
            return Err(Error::InvalidInput(format!(
                "n = {} must be positive and prime to N = {}",
                self.n, self.level
            )));
        }
        if self.m1 == 0 || self.m2 == 0 {
            return Err(Error::InvalidInput("m1 and m2 must be positive".into()));
        }
        if !self.h.is_even() {
            return Err(Error::InvalidInput(format!("test function {} is not even", self.h)));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Truncation target `max(abs_tol, rel_tol psi(N))`.
    pub fn target(&self) -> f64 {
        self.abs_tol.max(self.rel_tol * psi(self.level) as f64)
    }
}

/// All sides of one evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KtfReport {
    /// The request.
    pub request: KtfRequest,
    /// `Geo1`.
    pub geo_main: Complex64,
    /// `Geo2`, truncated.
    pub geo_kloosterman: Complex64,
    /// `Spec2`.
    pub spec_continuous: Complex64,
    /// `Spec1 = Geo1 + Geo2 - Spec2`.
    pub spec_cuspidal_inferred: Complex64,
    /// Number of `c in N Z^+` summed.
    pub c_terms_used: u64,
    /// Certified bound on the omitted Kloosterman terms.
    pub tail_bound: f64,
    /// Change of `Geo2 - Spec2` when the t-panels are doubled in width.
    pub t_quadrature_error: f64,
}

impl KtfReport {
    /// Parse a serialized report and re-verify the defining identity.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| Error::Data(format!("bad report JSON: {e}")))?;
        r.request.validate()?;
        let want = r.geo_main + r.geo_kloosterman - r.spec_continuous;
        let scale = 1.0 + want.norm();
        if (want - r.spec_cuspidal_inferred).norm() > 1e-12 * scale {
            return Err(Error::Data("report violates Spec1 = Geo1 + Geo2 - Spec2".into()));
        }
        Ok(r)
    }
}

/// `T(m1, m2, n)` and its witness: `Some(b)` iff `m1 m2 = b^2 n` with
/// `b | gcd(m1, m2)`.
pub fn t_predicate(m1: u64, m2: u64, n: u64) -> Option<u64> {
    let prod = m1 as u128 * m2 as u128;
    if n == 0 || prod % n as u128 != 0 {
        return None;
    }
    let q = prod / n as u128;
    let b = (q as f64).sqrt().round() as u128;
    let b = (b.saturating_sub(2)..=b + 2).find(|x| x * x == q)? as u64;
    (gcd(m1 as i64, m2 as i64) % b == 0).then_some(b)
}

/// `J = (1/pi^2) int_R h(t) tanh(pi t) t dt`.
pub fn main_term_integral(h: &TestFunction) -> Result<f64> {
    Ok(2.0 * spectral_moment(h)? / (PI * PI))
}

/// `Geo1`; zero when `T = 0` or when `gcd(m1 / b, N) > 1`.
pub fn geo_main(req: &KtfRequest) -> Result<Complex64> {
    req.validate()?;
    let j = main_term_integral(&req.h)?;
    Ok(geo_main_with(req.level, &req.omega, req.n, req.m1, req.m2, j))
}

fn geo_main_with(level: u64, omega: &DirichletCharacter, n: u64, m1: u64, m2: u64, j: f64) -> Complex64 {
    match t_predicate(m1, m2, n) {
        Some(b) => omega.eval((m1 / b) as i64).conj() * (psi(level) as f64 * j),
        None => c64(0.0, 0.0),
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]` in panels of width about
/// `width`.
fn panel_rule(a: f64, b: f64, width: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = ((b - a) / width).ceil().max(1.0) as usize;
    let rule = gauss_legendre(T_ORDER);
    let (x, w) = (&rule.0, &rule.1);
    let step = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * T_ORDER);
    let mut weights = Vec::with_capacity(panels * T_ORDER);
    for p in 0..panels {
        let lo = a + p as f64 * step;
        for (xi, wi) in x.iter().zip(w) {
            nodes.push(lo + 0.5 * step * (xi + 1.0));
            weights.push(0.5 * step * wi);
        }
    }
    (nodes, weights)
}

/// `I(x) = int_0^T Im J_{2it}(x) h(t) t / cosh(pi t) dt` on a fixed rule.
#[derive(Debug, Clone)]
pub struct BesselKernel {
    orders: Vec<JOrder>,
    factors: Vec<f64>,
}

impl BesselKernel {
    /// Build the rule for `h` with panel width `width`.
    pub fn new(h: &TestFunction, width: f64) -> Self {
        let (nodes, weights) = panel_rule(0.0, h.r_max(), width);
        let orders = nodes.iter().map(|&t| JOrder::new(t)).collect();
        let factors = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * h.eval_real(t) * t / (PI * t).cosh())
            .collect();
        Self { orders, factors }
    }

    /// `I(x)` for `x > 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (o, f) in self.orders.iter().zip(&self.factors) {
            if *f != 0.0 {
                acc += f * o.eval(x)?.im;
            }
        }
        Ok(acc)
    }

    /// Numerical `sup |I(x)| / x` over `0 < x <= x_max`, sampled on a
    /// geometric grid down to `x_max 2^{-40}` (where `I(x) / x` has
    /// settled to its limit) and inflated by 5%.
    pub fn linear_constant(&self, x_max: f64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        let mut x = x_max;
        for _ in 0..=160 {
            sup = sup.max(self.eval(x)?.abs() / x);
            x *= 0.8408964152537145; // 2^{-1/4}
        }
        Ok(1.05 * sup)
    }
}

/// How the Kloosterman series is cut off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Sum until the certified tail bound drops below the target.
    Certified {
        /// Tail target.
        target: f64,
    },
    /// Sum `c = N k` for `k <= terms`, reporting the certified bound.
    Fixed {
        /// Number of terms.
        terms: u64,
    },
}

/// `zeta(3/2)^2 = sum_k tau(k) k^{-3/2}`.
const ZETA_THREE_HALVES_SQ: f64 = 6.824_504_962_419_627;

/// Prefix sums `sum_{k <= K} tau(k) k^{-3/2}` for `K <= 4 MAX_C_TERMS`.
fn tau_prefix() -> &'static [f64] {
    static PREFIX: OnceLock<Vec<f64>> = OnceLock::new();
    PREFIX.get_or_init(|| {
        let len = 4 * MAX_C_TERMS as usize + 1;
        let mut tau = vec![0u32; len];
        for d in 1..len {
            for m in (d..len).step_by(d) {
                tau[m] += 1;
            }
        }
        let mut out = vec![0.0; len];
        let mut acc = CompensatedSum::default();
        for k in 1..len {
            acc.add(c64(tau[k] as f64 * (k as f64).powf(-1.5), 0.0));
            out[k] = acc.value().re;
        }
        out
    })
}

/// `sum_{k > K} tau(k) k^{-3/2}`, exact up to rounding for tabulated `K`
/// and bounded by `3 K^{-1/2} (log K + 3)` beyond (from
/// `sum_{k <= x} tau(k) <= x (log x + 1)` and partial summation).
fn tau_tail(k: u64) -> f64 {
    let prefix = tau_prefix();
    match prefix.get(k as usize) {
        Some(p) => (ZETA_THREE_HALVES_SQ - p).max(0.0) * (1.0 + 1e-12) + 1e-14,
        None => {
            let kf = k as f64;
            3.0 / kf.sqrt() * (kf.ln() + 3.0)
        }
    }
}

/// Precomputed data for one `(N, omega', h)`, shared by every
/// `(n, m1, m2)` evaluated against it.
pub struct KtfContext {
    level: u64,
    omega: DirichletCharacter,
    h: TestFunction,
    j: f64,
    kernel: BesselKernel,
    kernel_coarse: BesselKernel,
    spectral: SpectralGrid,
    spectral_coarse: SpectralGrid,
}

/// Per basis element, the t-weights `w_j h(t_j) / (pi ||phi||^2 |L|^2)`.
struct SpectralGrid {
    nodes: Vec<f64>,
    elements: Vec<(EisensteinBasisElement, Vec<f64>)>,
}

impl SpectralGrid {
    fn new(level: u64, omega: &DirichletCharacter, h: &TestFunction, width: f64) -> Result<Self> {
        let t_max = h.r_max();
        let (nodes, weights) = panel_rule(-t_max, t_max, width);
        let mut elements = Vec::new();
        for e in enumerate_basis(level, omega)? {
            let twist = e.twist_mod_n();
            let norm = e.norm_sq_f64();
            let mut w = Vec::with_capacity(nodes.len());
            for (&t, &wt) in nodes.iter().zip(&weights) {
                // GL nodes never hit t = 0, where a principal twist has its pole.
                let l = dirichlet_l(&twist, c64(1.0, 2.0 * t), LVariant::Full)?;
                w.push(wt * h.eval_real(t) / (PI * norm * l.norm_sqr()));
            }
            elements.push((e, w));
        }
        Ok(Self { nodes, elements })
    }

    fn integral(&self, n: u64, m1: u64, m2: u64) -> Result<Complex64> {
        let mut total = CompensatedSum::default();
        let ratio = (m1 as f64 / m2 as f64).ln();
        for (e, w) in &self.elements {
            let a1 = sigma_coefficients(e, m1 as i64);
            let a2 = sigma_coefficients(e, m2 as i64);
            if a1.is_empty() || a2.is_empty() {
                continue;
            }
            let lm = (e.m as f64).ln();
            let mut acc = CompensatedSum::default();
            for (&t, &wt) in self.nodes.iter().zip(w) {
                if wt == 0.0 {
                    continue;
                }
                let s = c64(0.0, t);
                let sig = |a: &[(u64, Complex64)]| -> Complex64 {
                    let mut v = c64(0.0, 0.0);
                    for (c, ac) in a {
                        v += ac * (-2.0 * s * (*c as f64).ln()).exp();
                    }
                    v * (-(1.0 + 2.0 * s) * lm).exp()
                };
                let lam = lambda_n_eis(n, &e.pair, s)?;
                let phase = c64(0.0, t * ratio).exp();
                acc.add(lam * sig(&a1) * sig(&a2).conj() * phase * wt);
            }
            total.add(acc.value());
        }
        Ok(total.value())
    }
}

impl KtfContext {
    /// Precompute the quadrature rules and Eisenstein data.
    pub fn new(level: u64, omega: &DirichletCharacter, h: &TestFunction) -> Result<Self> {
        KtfRequest::new(level, omega.clone(), 1, 1, 1, h.clone())?;
        Ok(Self {
            level,
            omega: omega.clone(),
            h: h.clone(),
            j: main_term_integral(h)?,
            kernel: BesselKernel::new(h, T_PANEL),
            kernel_coarse: BesselKernel::new(h, 2.0 * T_PANEL),
            spectral: SpectralGrid::new(level, omega, h, T_PANEL)?,
            spectral_coarse: SpectralGrid::new(level, omega, h, 2.0 * T_PANEL)?,
        })
    }

    /// The level.
    pub fn level(&self) -> u64 {
        self.level
    }

    /// `J = (1/pi^2) int h(t) tanh(pi t) t dt`.
    pub fn j(&self) -> f64 {
        self.j
    }

    /// The kernel `I(x)`.
    pub fn kernel(&self) -> &BesselKernel {
        &self.kernel
    }

    fn psi(&self) -> f64 {
        psi(self.level) as f64
    }

    /// `Geo1`.
    pub fn geo_main(&self, n: u64, m1: u64, m2: u64) -> Complex64 {
        geo_main_with(self.level, &self.omega, n, m1, m2, self.j)
    }

    /// `Spec2`.
    pub fn spec_continuous(&self, n: u64, m1: u64, m2: u64) -> Result<Complex64> {
        self.spectral.integral(n, m1, m2)
    }

    /// Certified bound on `sum_{k > K}` of the Kloosterman terms, given
    /// `K_h` with `|I(x)| <= K_h x`.
    fn tail_bound(&self, n: u64, m1: u64, m2: u64, k_h: f64, k: u64) -> f64 {
        let nf = self.level as f64;
        let big_x = 4.0 * PI * ((n * m1) as f64 * m2 as f64).sqrt();
        let g = gcd((m1 * n) as i64, (m2 * n) as i64) as f64;
        let pref = 4.0 * self.psi() / PI
            * tau(n) as f64
            * g.sqrt()
            * (self.omega.conductor() as f64).sqrt()
            * k_h
            * big_x
            * tau(self.level) as f64
            * nf.powf(-1.5);
        pref * tau_tail(k)
    }

    /// `Geo2` with the given truncation: `(value, terms, tail bound)`.
    pub fn geo_kloosterman(&self, n: u64, m1: u64, m2: u64, trunc: Truncation) -> Result<(Complex64, u64, f64)> {
        let big_x = 4.0 * PI * ((n * m1) as f64 * m2 as f64).sqrt();
        let x_max = big_x / self.level as f64;
        let k_h = self.kernel.linear_constant(x_max)?;
        let terms = match trunc {
            Truncation::Fixed { terms } => terms,
            Truncation::Certified { target } => {
                let mut k = 1u64;
                while self.tail_bound(n, m1, m2, k_h, k) > target {
                    k *= 2;
                    if k > 4 * MAX_C_TERMS {
                        break;
                    }
                }
                // bisect down to the smallest adequate K
                let (mut lo, mut hi) = (k / 2, k);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if self.tail_bound(n, m1, m2, k_h, mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if hi > MAX_C_TERMS {
                    return Err(Error::Tolerance(format!(
                        "Kloosterman tail: {} terms needed for target {target:e} \
                         (cap {MAX_C_TERMS}, K_h = {k_h:e}, bound at cap {:e})",
                        hi,
                        self.tail_bound(n, m1, m2, k_h, MAX_C_TERMS)
                    )));
                }
                hi.max(MIN_C_TERMS)
            }
        };
        let mut acc = CompensatedSum::default();
        for k in 1..=terms {
            let c = self.level * k;
            let s = kloosterman(
                &KloostermanQuery::new(m2 as i64, m1 as i64, n as i64, c, self.omega.clone())?,
                KloostermanMode::Factored,
            )?;
            if s.norm() < 1e-12 {
                continue;
            }
            acc.add(s * (self.kernel.eval(big_x / c as f64)? / c as f64));
        }
        let value = acc.value() * (-4.0 * self.psi() / PI);
        Ok((value, terms, self.tail_bound(n, m1, m2, k_h, terms)))
    }

    /// Change of `Geo2` (first `terms` terms) and `Spec2` between the
    /// standard and the doubled panel width.
    fn quadrature_error(&self, n: u64, m1: u64, m2: u64, terms: u64) -> Result<f64> {
        let big_x = 4.0 * PI * ((n * m1) as f64 * m2 as f64).sqrt();
        let mut diff = 0.0;
        for k in 1..=terms.min(50) {
            let c = self.level * k;
            let s = kloosterman(
                &KloostermanQuery::new(m2 as i64, m1 as i64, n as i64, c, self.omega.clone())?,
                KloostermanMode::Factored,
            )?;
            let x = big_x / c as f64;
            diff += s.norm() / c as f64 * (self.kernel.eval(x)? - self.kernel_coarse.eval(x)?).abs();
        }
        let geo = 4.0 * self.psi() / PI * diff;
        let spec = (self.spectral.integral(n, m1, m2)? - self.spectral_coarse.integral(n, m1, m2)?).norm();
        Ok(geo + spec)
    }

    /// Evaluate every side for `(n, m1, m2)`.
    pub fn report(&self, req: &KtfRequest) -> Result<KtfReport> {
        req.validate()?;
        if req.level != self.level || req.omega != self.omega || req.h != self.h {
            return Err(Error::InvalidInput("request does not match the context".into()));
        }
        let (n, m1, m2) = (req.n, req.m1, req.m2);
        let geo_main = self.geo_main(n, m1, m2);
        let (geo_kloosterman, terms, tail) =
            self.geo_kloosterman(n, m1, m2, Truncation::Certified { target: req.target() })?;
        let spec_continuous = self.spec_continuous(n, m1, m2)?;
        let t_err = self.quadrature_error(n, m1, m2, terms)?;
        Ok(KtfReport {
            request: req.clone(),
            geo_main,
            geo_kloosterman,
            spec_continuous,
            spec_cuspidal_inferred: geo_main + geo_kloosterman - spec_continuous,
            c_terms_used: terms,
            tail_bound: tail,
            t_quadrature_error: t_err,
        })
    }
}

/// `Geo2` for a request, with the certified truncation; returns the value
/// and the tail bound.
pub fn geo_kloosterman(req: &KtfRequest) -> Result<(Complex64, f64)> {
    req.validate()?;
    let ctx = KtfContext::new(req.level, &req.omega, &req.h)?;
    let (v, _, tail) = ctx.geo_kloosterman(req.n, req.m1, req.m2, Truncation::Certified { target: req.target() })?;
    Ok((v, tail))
}

/// `Spec2` for a request.
pub fn spec_continuous(req: &KtfRequest) -> Result<Complex64> {
    req.validate()?;
    SpectralGrid::new(req.level, &req.omega, &req.h, T_PANEL)?.integral(req.n, req.m1, req.m2)
}

/// Assemble the full report, inferring the cuspidal side.
pub fn cuspidal_inferred(req: &KtfRequest) -> Result<KtfReport> {
    req.validate()?;
    KtfContext::new(req.level, &req.omega, &req.h)?.report(req)
}

/// One Maass form's data for the cuspidal side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    /// Spectral parameter: real, or `i x` with `|x| < 1/2`.
    pub t: Complex64,
    /// `a_{m1}(u)`.
    pub a_m1: Complex64,
    /// `a_{m2}(u)`.
    pub a_m2: Complex64,
    /// `||u||^2`.
    pub norm_sq: f64,
    /// `lambda_n(u)`.
    pub lambda: Complex64,
}

impl SpectralDatum {
    /// Check the parameter regime and the norm.
    pub fn validate(&self) -> Result<()> {
        let t = self.t;
        let real = t.im == 0.0;
        let exceptional = t.re == 0.0 && t.im.abs() < 0.5;
        if !(real || exceptional) || !t.re.is_finite() {
            return Err(Error::Data(format!(
                "spectral parameter {t} is neither real nor exceptional (i x, |x| < 1/2)"
            )));
        }
        if !(self.norm_sq > 0.0 && self.norm_sq.is_finite()) {
            return Err(Error::Data(format!("norm_sq must be positive, got {}", self.norm_sq)));
        }
        for v in [self.a_m1, self.a_m2, self.lambda] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Data("non-finite coefficient".into()));
            }
        }
        Ok(())
    }
}

/// `sum_j lambda_n a_{m1} conj(a_{m2}) h(t_j) / (||u_j||^2 cosh(pi t_j))`.
pub fn cuspidal_from_data(h: &TestFunction, data: &[SpectralDatum]) -> Result<Complex64> {
    let mut acc = CompensatedSum::default();
    for d in data {
        d.validate()?;
        let cosh = (d.t * PI).cosh();
        acc.add(d.lambda * d.a_m1 * d.a_m2.conj() * h.eval(d.t) / (cosh * d.norm_sq));
    }
    Ok(acc.value())
}

/// Column names of the spectral-data CSV.
pub const SPECTRAL_CSV_HEADER: [&str; 9] =
    ["t_re", "t_im", "a_m1_re", "a_m1_im", "a_m2_re", "a_m2_im", "norm_sq", "lambda_re", "lambda_im"];

/// Read spectral data: header [`SPECTRAL_CSV_HEADER`], one row per form,
/// lines starting with `#` ignored.
pub fn read_spectral_csv<R: Read>(reader: R) -> Result<Vec<SpectralDatum>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Data(format!("unreadable header: {e}")))?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != SPECTRAL_CSV_HEADER {
        return Err(Error::Data(format!(
            "header {:?} differs from {:?}",
            got, SPECTRAL_CSV_HEADER
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("row {}: {e}", i + 1)))?;
        let mut v = [0.0f64; 9];
        for (k, slot) in v.iter_mut().enumerate() {
            let field = rec
                .get(k)
                .ok_or_else(|| Error::Data(format!("row {}: missing field {}", i + 1, SPECTRAL_CSV_HEADER[k])))?;
            *slot = field.parse().map_err(|_| {
                Error::Data(format!("row {}: {} = {field:?} is not a number", i + 1, SPECTRAL_CSV_HEADER[k]))
            })?;
        }
        let d = SpectralDatum {
            t: c64(v[0], v[1]),
            a_m1: c64(v[2], v[3]),
            a_m2: c64(v[4], v[5]),
            norm_sq: v[6],
            lambda: c64(v[7], v[8]),
        };
        d.validate().map_err(|e| Error::Data(format!("row {}: {e}", i + 1)))?;
        out.push(d);
    }
    Ok(out)
}

/// Absolute and relative differences of one side between the two routes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TermDelta {
    /// Value from the formula with general `n`.
    pub direct: Complex64,
    /// Value from the `l`-sum of classical (`n = 1`) terms.
    pub classical: Complex64,
    /// `|direct - classical|`.
    pub abs: f64,
    /// `abs / max(|direct|, |classical|, DELTA_FLOOR)`.
    pub rel: f64,
}

/// Values below this size are compared absolutely: a side that cancels to
/// rounding level has no meaningful relative error.
pub const DELTA_FLOOR: f64 = 1e-6;

impl TermDelta {
    fn new(direct: Complex64, classical: Complex64) -> Self {
        let abs = (direct - classical).norm();
        let scale = direct.norm().max(classical.norm()).max(DELTA_FLOOR);
        Self { direct, classical, abs, rel: abs / scale }
    }
}

/// Per-term comparison of the formula against the `l`-sum of classical
/// formulas.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CrossCheck {
    /// `Geo1`.
    pub geo_main: TermDelta,
    /// `Geo2`, both routes truncated at `c <= terms N`.
    pub geo_kloosterman: TermDelta,
    /// `Spec2`.
    pub spec_continuous: TermDelta,
}

impl CrossCheck {
    /// Largest relative delta.
    pub fn max_rel(&self) -> f64 {
        self.geo_main.rel.max(self.geo_kloosterman.rel).max(self.spec_continuous.rel)
    }
}

impl KtfContext {
    /// Evaluate every side directly and as
    /// `sum_{l | (n, m1)} conj(omega'(l)) CK(n m1 / l^2, m2)`, with the
    /// Kloosterman sums of both routes truncated at `c <= terms N`.
    pub fn classical_crosscheck(&self, n: u64, m1: u64, m2: u64, terms: u64) -> Result<CrossCheck> {
        let level = self.level;
        let ells: Vec<u64> = divisors(gcd(n as i64, m1 as i64));
        let big_x = 4.0 * PI * ((n * m1) as f64 * m2 as f64).sqrt();
        let c_max = terms * level;
        // I(X / c) for every c <= c_max that either route needs.
        let mut kernel_at = vec![0.0; c_max as usize + 1];
        for c in 1..=c_max {
            let needed = c % level == 0 || ells.iter().any(|&l| c % l == 0 && (c / l) % level == 0);
            if needed {
                kernel_at[c as usize] = self.kernel.eval(big_x / c as f64)?;
            }
        }
        let pref = -4.0 * self.psi() / PI;

        // Direct route.
        let mut acc = CompensatedSum::default();
        for k in 1..=terms {
            let c = level * k;
            let s = kloosterman(
                &KloostermanQuery::new(m2 as i64, m1 as i64, n as i64, c, self.omega.clone())?,
                KloostermanMode::Factored,
            )?;
            acc.add(s * (kernel_at[c as usize] / c as f64));
        }
        let geo2_direct = acc.value() * pref;
        let geo1_direct = self.geo_main(n, m1, m2);
        let spec2_direct = self.spec_continuous(n, m1, m2)?;

        // Classical route.
        let (mut geo1, mut geo2, mut spec2) = (c64(0.0, 0.0), CompensatedSum::default(), c64(0.0, 0.0));
        for &l in &ells {
            let w = self.omega.eval(l as i64).conj();
            let a = n * m1 / (l * l);
            geo1 += w * self.geo_main(1, a, m2);
            spec2 += w * self.spec_continuous(1, a, m2)?;
            for k in 1..=c_max / (l * level) {
                let cp = level * k;
                let s = kloosterman(
                    &KloostermanQuery::new(m2 as i64, a as i64, 1, cp, self.omega.clone())?,
                    KloostermanMode::Factored,
                )?;
                geo2.add(w * s * (kernel_at[(l * cp) as usize] / cp as f64));
            }
        }
        Ok(CrossCheck {
            geo_main: TermDelta::new(geo1_direct, geo1),
            geo_kloosterman: TermDelta::new(geo2_direct, geo2.value() * pref),
            spec_continuous: TermDelta::new(spec2_direct, spec2),
        })
    }
}

/// [`KtfContext::classical_crosscheck`] for a request, with `50` Kloosterman
/// terms.
pub fn classical_crosscheck(req: &KtfRequest) -> Result<CrossCheck> {
    req.validate()?;
    KtfContext::new(req.level, &req.omega, &req.h)?.classical_crosscheck(req.n, req.m1, req.m2, 50)
}

/// Both sides of
/// `lambda_n(it) sigma_it(m) m^{it} =
///  sum_{l | (n, m)} conj(omega'(l)) sigma_it(n m / l^2) (n m / l^2)^{it}`.
pub fn hecke_sigma_identity(n: u64, m: u64, e: &EisensteinBasisElement, t: f64) -> Result<(Complex64, Complex64)> {
    let level = e.level();
    if n == 0 || m == 0 || gcd((n * m) as i64, level as i64) != 1 {
        return Err(Error::InvalidInput(format!("n m = {} must be positive and prime to {level}", n * m)));
    }
    let s = c64(0.0, t);
    let pw = |k: u64| (s * (k as f64).ln()).exp();
    let lhs = lambda_n_eis(n, &e.pair, s)? * crate::eisenstein::sigma_s(e, m as i64, s)? * pw(m);
    let omega = e.omega();
    let mut rhs = c64(0.0, 0.0);
    for l in divisors(gcd(n as i64, m as i64)) {
        let k = n * m / (l * l);
        rhs += omega.eval(l as i64).conj() * crate::eisenstein::sigma_s(e, k as i64, s)? * pw(k);
    }
    Ok((lhs, rhs))
}

/// `J psi(N)`, the size the cuspidal side approaches for `n = m1 = m2 = 1`.
pub fn expected_main(level: u64, h: &TestFunction) -> Result<f64> {
    Ok(main_term_integral(h)? * arith::psi(level) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;
    use crate::transforms::{v_zero, VZeroRoute};

    fn gauss1() -> TestFunction {
        TestFunction::parse("gaussian:1").unwrap()
    }

    fn principal(n: u64) -> DirichletCharacter {
        DirichletCharacter::principal(n).unwrap()
    }

    #[test]
    fn t_predicate_examples() {
        assert_eq!(t_predicate(1, 1, 1), Some(1));
        assert_eq!(t_predicate(2, 3, 6), Some(1));
        assert_eq!(t_predicate(1, 2, 1), None);
        assert_eq!(t_predicate(4, 1, 1), None); // b = 2 does not divide gcd = 1
        assert_eq!(t_predicate(6, 6, 1), Some(6));
        assert_eq!(t_predicate(6, 6, 4), Some(3));
        // symmetric criterion: a_i a_j / a_k a perfect square for all i, j, k
        let sq = |x: u64, y: u64, z: u64| (x * y) % z == 0 && {
            let q = x * y / z;
            let r = (q as f64).sqrt().round() as u64;
            r * r == q
        };
        for a in 1..=20u64 {
            for b in 1..=20u64 {
                for c in 1..=20u64 {
                    let want = sq(a, b, c) && sq(a, c, b) && sq(b, c, a);
                    assert_eq!(t_predicate(a, b, c).is_some(), want, "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn tau_tail_is_consistent() {
        // zeta(3/2)^2 from the Euler-Maclaurin tail of zeta(3/2)
        let mut z = 0.0;
        let m = 1_000_000u64;
        for k in 1..m {
            z += (k as f64).powf(-1.5);
        }
        let mf = m as f64;
        z += 2.0 / mf.sqrt() + 0.5 * mf.powf(-1.5) + 0.125 * mf.powf(-2.5);
        assert!((z * z - ZETA_THREE_HALVES_SQ).abs() < 1e-11, "{}", z * z);
        for k in [1u64, 10, 100, 1000, 100_000, 4 * MAX_C_TERMS] {
            let t = tau_tail(k);
            let kf = k as f64;
            assert!(t > 0.0 && t <= 3.0 / kf.sqrt() * (kf.ln() + 3.0), "{k}: {t}");
        }
        assert!(tau_tail(4 * MAX_C_TERMS) > 2.0 / (4.0 * MAX_C_TERMS as f64).sqrt());
    }

    #[test]
    fn main_term_values() {
        let h = gauss1();
        let j = main_term_integral(&h).unwrap();
        let via_v = 4.0 / PI * v_zero(&h, VZeroRoute::Pipeline).unwrap();
        assert!((j - via_v).abs() < 1e-8 * j, "{j} vs {via_v}");
        let req = KtfRequest::new(6, principal(6), 1, 1, 1, h.clone()).unwrap();
        assert!((geo_main(&req).unwrap() - 12.0 * j).norm() < 1e-12);
        let req = KtfRequest::new(6, principal(6), 1, 1, 2, h.clone()).unwrap();
        assert_eq!(geo_main(&req).unwrap(), c64(0.0, 0.0));
        let req = KtfRequest::new(6, principal(6), 1, 3, 3, h).unwrap();
        assert!((geo_main(&req).unwrap() - 12.0 * j).norm() < 1e-12);
        // (m1 / b)(m2 / b) = n, so omega'(m1 / b) never meets a factor of N.
        for n in (1..40u64).filter(|n| gcd(*n as i64, 6) == 1) {
            for m1 in 1..40u64 {
                for m2 in 1..40u64 {
                    if let Some(b) = t_predicate(m1, m2, n) {
                        assert_eq!((m1 / b) * (m2 / b), n);
                    }
                }
            }
        }
    }

    #[test]
    fn cuspidal_data_examples() {
        let h = gauss1();
        assert_eq!(cuspidal_from_data(&h, &[]).unwrap(), c64(0.0, 0.0));
        let one = SpectralDatum {
            t: c64(1.0, 0.0),
            a_m1: c64(1.0, 0.0),
            a_m2: c64(1.0, 0.0),
            norm_sq: 1.0,
            lambda: c64(1.0, 0.0),
        };
        let v = cuspidal_from_data(&h, std::slice::from_ref(&one)).unwrap();
        assert!((v.re - (-1.0f64).exp() / PI.cosh()).abs() < 1e-15 && v.im == 0.0);
        let ex = SpectralDatum { t: c64(0.0, 0.2), ..one.clone() };
        let v = cuspidal_from_data(&h, &[ex]).unwrap();
        assert!((v.re - (0.04f64).exp() / (0.2 * PI).cos()).abs() < 1e-14);
        let bad = SpectralDatum { t: c64(0.0, 0.7), ..one };
        assert!(cuspidal_from_data(&h, &[bad]).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = "# two forms\nt_re,t_im,a_m1_re,a_m1_im,a_m2_re,a_m2_im,norm_sq,lambda_re,lambda_im\n\
                    9.5,0,1,0,1,0,2.5,1,0\n0,0.25,1,0,1,0,1,1,0\n";
        let data = read_spectral_csv(text.as_bytes()).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data[1].t, c64(0.0, 0.25));
        let bad_header = "t,a\n1,2\n";
        assert!(matches!(read_spectral_csv(bad_header.as_bytes()), Err(Error::Data(_))));
        let bad_norm = "t_re,t_im,a_m1_re,a_m1_im,a_m2_re,a_m2_im,norm_sq,lambda_re,lambda_im\n1,0,1,0,1,0,0,1,0\n";
        assert!(matches!(read_spectral_csv(bad_norm.as_bytes()), Err(Error::Data(_))));
        let short = "t_re,t_im,a_m1_re,a_m1_im,a_m2_re,a_m2_im,norm_sq,lambda_re,lambda_im\n1,0,1\n";
        assert!(matches!(read_spectral_csv(short.as_bytes()), Err(Error::Data(_))));
    }

    #[test]
    fn hecke_sigma_identity_examples() {
        let e1 = enumerate_basis(1, &principal(1)).unwrap().remove(0);
        let (l, r) = hecke_sigma_identity(2, 2, &e1, 0.7).unwrap();
        assert!((l - r).norm() < 1e-12);
        let (l, r) = hecke_sigma_identity(1, 6, &e1, 0.3).unwrap();
        assert!((l - r).norm() < 1e-12);
        for omega in enumerate_characters(5).unwrap() {
            for e in enumerate_basis(5, &omega).unwrap() {
                for (n, m) in [(2u64, 3u64), (4, 6), (12, 18), (9, 3)] {
                    let (l, r) = hecke_sigma_identity(n, m, &e, 1.1).unwrap();
                    assert!((l - r).norm() < 1e-12 * (1.0 + l.norm()), "{n} {m}");
                }
            }
        }
        assert!(hecke_sigma_identity(5, 1, &e1, 0.0).is_ok());
    }

    #[test]
    fn level_one_has_no_cusp_forms_in_range() {
        // The first cusp form for SL_2(Z) has t = 9.53..., where
        // h = exp(-t^2) is below 1e-39, so Spec1 vanishes.
        let h = gauss1();
        let ctx = KtfContext::new(1, &principal(1), &h).unwrap();
        for (m1, m2) in [(1u64, 1u64), (1, 2), (2, 2), (3, 1)] {
            let geo1 = ctx.geo_main(1, m1, m2);
            let (geo2, _, _) = ctx.geo_kloosterman(1, m1, m2, Truncation::Fixed { terms: 20000 }).unwrap();
            let spec2 = ctx.spec_continuous(1, m1, m2).unwrap();
            let spec1 = geo1 + geo2 - spec2;
            assert!(spec1.norm() < 2e-4, "m = ({m1}, {m2}): {geo1} + {geo2} - {spec2} = {spec1}");
        }
    }

    #[test]
    fn swapping_m_conjugates() {
        let h = gauss1();
        let omega = enumerate_characters(13).unwrap().into_iter().find(|w| w.parity() == 1 && !w.is_principal()).unwrap();
        let ctx = KtfContext::new(13, &omega, &h).unwrap();
        let s12 = ctx.spec_continuous(1, 2, 3).unwrap();
        let s21 = ctx.spec_continuous(1, 3, 2).unwrap();
        assert!((s12 - s21.conj()).norm() < 1e-12 * (1.0 + s12.norm()));
        let (g12, _, _) = ctx.geo_kloosterman(1, 2, 3, Truncation::Fixed { terms: 40 }).unwrap();
        let (g21, _, _) = ctx.geo_kloosterman(1, 3, 2, Truncation::Fixed { terms: 40 }).unwrap();
        assert!((g12 - g21.conj()).norm() < 1e-12 * (1.0 + g12.norm()));
        let (g, _, _) = ctx.geo_kloosterman(1, 2, 2, Truncation::Fixed { terms: 40 }).unwrap();
        assert!(g.im.abs() < 1e-12 * (1.0 + g.norm()));
    }

    #[test]
    fn crosscheck_small() {
        let h = gauss1();
        for level in [4u64, 9, 10] {
            let ctx = KtfContext::new(level, &principal(level), &h).unwrap();
            let cc = ctx.classical_crosscheck(1, 2, 3, 30).unwrap();
            assert_eq!(cc.max_rel(), 0.0);
            for (n, m1, m2) in [(3u64, 1u64, 3u64), (3, 3, 1), (7, 2, 4), (9, 6, 6)] {
                if gcd(n as i64, level as i64) != 1 {
                    continue;
                }
                let cc = ctx.classical_crosscheck(n, m1, m2, 30).unwrap();
                assert!(cc.max_rel() < 1e-8, "N={level} {n} {m1} {m2}: {cc:?}");
            }
        }
    }

    #[test]
    fn report_identity_and_json() {
        let h = gauss1();
        let req = KtfRequest::new(11, principal(11), 1, 1, 1, h).unwrap().with_tolerances(1e-8, 5e-2).unwrap();
        let rep = cuspidal_inferred(&req).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        let back = KtfReport::from_json(&text).unwrap();
        assert_eq!(back.c_terms_used, rep.c_terms_used);
        assert!(rep.tail_bound <= req.target());
        let mut broken = rep.clone();
        broken.spec_cuspidal_inferred += c64(1.0, 0.0);
        assert!(KtfReport::from_json(&serde_json::to_string(&broken).unwrap()).is_err());
    }
}
