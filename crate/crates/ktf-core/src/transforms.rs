//! Test functions and the transforms linking them to point-pair invariants
//!
//! For an even test function `h(t)` the pipeline computes
//!
//! * `Phi(y) = (1/2 pi) int h(r) y^{-ir} dr`, stored as `g(v) = Phi(e^v)`,
//! * `Q(u) = Phi(y)` with `u = y + 1/y - 2 = 4 sinh^2(v/2)`,
//! * `V(u) = -(1/pi) int_R Q'(u + w^2) dw`,
//!
//! and, in the other direction, `Q(u) = int_R V(u + x^2) dx` followed by the
//! Mellin transform `h(t) = int_0^inf Phi(y) y^{it} dy/y`. `Q'` is obtained by
//! differentiating the defining integral of `Phi`, never by differencing
//! grid values.
//!
//! Grids are uniform in `v = 2 asinh(sqrt(u)/2)`, so they are logarithmic in
//! `u` for large `u`. Beyond the last node a grid function is zero: the
//! grid end is chosen where the Gaussian factor of every built-in family has
//! dropped below `1e-17`.

use crate::error::{Error, Result};
use crate::quadrature::{Quadrature, Scheme};
use crate::specfun::JOrder;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

/// Shape of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `h(t) = exp(-(t / sigma)^2)`.
    Gaussian {
        /// Scale `sigma > 0`.
        sigma: f64,
    },
    /// `h(t) = exp(-((t - R) / w)^2) + exp(-((t + R) / w)^2)`.
    SpectralWindow {
        /// Center `R >= 0`.
        center: f64,
        /// Width `w > 0`.
        width: f64,
    },
    /// `h(t) = (sum_k c_k t^k) exp(-t^2)`.
    PolynomialGaussian {
        /// Coefficients `c_0, c_1, ...`.
        coeffs: Vec<f64>,
    },
}

/// A test function with its declared strip half-width `A` and decay
/// exponent `B`: `h` is holomorphic on `|Im t| < A` with
/// `|h(t)| <= C (1 + |t|)^{-B}` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    /// The family and its parameters.
    #[serde(flatten)]
    pub family: Family,
    /// Declared strip half-width `A`.
    pub strip: f64,
    /// Declared decay exponent `B`.
    pub decay: f64,
}

/// Default declared strip half-width of the built-in families.
pub const DEFAULT_STRIP: f64 = 2.0;

/// Default declared decay exponent of the built-in families.
pub const DEFAULT_DECAY: f64 = 4.0;

/// `ln(1e17)`, the Gaussian exponent at which a family is treated as zero.
const CUTOFF_EXPONENT: f64 = 39.2;

impl TestFunction {
    fn with(family: Family) -> Self {
        TestFunction { family, strip: DEFAULT_STRIP, decay: DEFAULT_DECAY }
    }

    /// `exp(-(t/sigma)^2)`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("gaussian scale must be positive, got {sigma}")));
        }
        Ok(Self::with(Family::Gaussian { sigma }))
    }

    /// Two Gaussian bumps of width `width` at `+-center`.
    pub fn spectral_window(center: f64, width: f64) -> Result<Self> {
        if !(center >= 0.0 && width > 0.0 && center.is_finite() && width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "spectral window needs center >= 0 and width > 0, got ({center}, {width})"
            )));
        }
        Ok(Self::with(Family::SpectralWindow { center, width }))
    }

    /// A polynomial (coefficients in increasing degree) times `exp(-t^2)`.
    pub fn polynomial_gaussian(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial_gaussian needs finite coefficients".into()));
        }
        Ok(Self::with(Family::PolynomialGaussian { coeffs }))
    }

    /// Override the declared strip half-width and decay exponent.
    pub fn with_bounds(mut self, strip: f64, decay: f64) -> Result<Self> {
        if !(strip > 0.0 && decay > 0.0) {
            return Err(Error::InvalidInput("strip and decay must be positive".into()));
        }
        self.strip = strip;
        self.decay = decay;
        Ok(self)
    }

    /// Parse a literal `family:param[,param]`, e.g. `gaussian:1`,
    /// `spectral_window:5` (width 1) or `spectral_window:5,0.5`,
    /// `polynomial_gaussian:1,0,2`.
    pub fn parse(literal: &str) -> Result<Self> {
        let (name, params) = literal
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("test function `{literal}` lacks `family:`")))?;
        let nums: Vec<f64> = params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad parameter `{p}` in `{literal}`")))
            })
            .collect::<Result<_>>()?;
        match (name.trim(), nums.as_slice()) {
            ("gaussian", [s]) => Self::gaussian(*s),
            ("spectral_window", [r]) => Self::spectral_window(*r, 1.0),
            ("spectral_window", [r, w]) => Self::spectral_window(*r, *w),
            ("polynomial_gaussian", cs) => Self::polynomial_gaussian(cs.to_vec()),
            _ => Err(Error::InvalidInput(format!("unknown test function `{literal}`"))),
        }
    }

    /// `h(t)` at complex `t`.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        match &self.family {
            Family::Gaussian { sigma } => (-(t / *sigma) * (t / *sigma)).exp(),
            Family::SpectralWindow { center, width } => {
                let a = (t - *center) / *width;
                let b = (t + *center) / *width;
                (-a * a).exp() + (-b * b).exp()
            }
            Family::PolynomialGaussian { coeffs } => {
                let mut p = Complex64::new(0.0, 0.0);
                for c in coeffs.iter().rev() {
                    p = p * t + *c;
                }
                p * (-t * t).exp()
            }
        }
    }

    /// `h(t)` at real `t`.
    pub fn eval_real(&self, t: f64) -> f64 {
        self.eval(Complex64::new(t, 0.0)).re
    }

    /// Evenness, decided from the family parameters.
    pub fn is_even(&self) -> bool {
        match &self.family {
            Family::PolynomialGaussian { coeffs } => {
                coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0)
            }
            _ => true,
        }
    }

    /// Whether `h >= 0` on the real line and on `i(-1/2, 1/2)`.
    pub fn nonnegative(&self) -> bool {
        matches!(self.family, Family::Gaussian { .. })
    }

    /// Radius beyond which `|h|` is below double-precision relevance.
    pub fn r_max(&self) -> f64 {
        let k = CUTOFF_EXPONENT.sqrt();
        match &self.family {
            Family::Gaussian { sigma } => k * sigma,
            Family::SpectralWindow { center, width } => center + k * width,
            Family::PolynomialGaussian { coeffs } => {
                (CUTOFF_EXPONENT + coeffs.len() as f64 * 3.0).sqrt()
            }
        }
    }

    /// Support radius in `v` of `g(v) = Phi(e^v)`.
    pub fn v_max(&self) -> f64 {
        let k = 2.0 * CUTOFF_EXPONENT.sqrt();
        match &self.family {
            Family::Gaussian { sigma } => k / sigma,
            Family::SpectralWindow { width, .. } => k / width,
            Family::PolynomialGaussian { coeffs } => {
                2.0 * (CUTOFF_EXPONENT + coeffs.len() as f64 * 3.0).sqrt()
            }
        }
    }

    /// Smallest length scale on which `h` varies.
    pub fn min_scale(&self) -> f64 {
        match &self.family {
            Family::Gaussian { sigma } => *sigma,
            Family::SpectralWindow { width, .. } => *width,
            Family::PolynomialGaussian { coeffs } => 1.0 / (1.0 + coeffs.len() as f64).sqrt(),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            Family::SpectralWindow { center, width } => write!(f, "spectral_window:{center},{width}"),
            Family::PolynomialGaussian { coeffs } => {
                let s: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "polynomial_gaussian:{}", s.join(","))
            }
        }
    }
}

/// Outcome of [`admissible_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `h(-t) = h(t)`.
    pub even: bool,
    /// `(1 + |t|)^B |h(t + i sigma)|` stays bounded on the sampled strip.
    pub bounded: bool,
    /// Largest sampled weighted value.
    pub sup_weighted: f64,
    /// `even && bounded`.
    pub pass: bool,
}

/// Check evenness (from the family parameters) and sample the weighted
/// bound on the strip `|Im t| <= a_req`.
pub fn admissible_check(h: &TestFunction, a_req: f64, b_req: f64) -> Admissibility {
    let even = h.is_even();
    let t_end = 4.0 * h.r_max() + 10.0;
    let mut sup_head: f64 = 0.0;
    let mut sup_tail: f64 = 0.0;
    let mut finite = true;
    for i in 0..=20 {
        let sigma = -a_req + 2.0 * a_req * i as f64 / 20.0;
        for j in 0..=2000 {
            let t = t_end * j as f64 / 2000.0;
            let v = h.eval(Complex64::new(t, sigma)).norm() * (1.0 + t).powf(b_req);
            if !v.is_finite() {
                finite = false;
            }
            if t < t_end / 2.0 {
                sup_head = sup_head.max(v);
            } else {
                sup_tail = sup_tail.max(v);
            }
        }
    }
    let bounded = finite && sup_tail <= sup_head;
    Admissibility { even, bounded, sup_weighted: sup_head.max(sup_tail), pass: even && bounded }
}

/// Cubic spline on a uniform grid `x_i = i dx`, clamped to zero slope at both
/// ends, evaluated as zero beyond the last node.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    dx: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Fit values `y` at `x_i = i dx`.
    pub fn new(dx: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 3, "spline needs at least three nodes");
        let h = dx;
        let mut diag = vec![4.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h);
        rhs[n - 1] = 6.0 / h * (-(y[n - 1] - y[n - 2]) / h);
        for i in 1..n - 1 {
            rhs[i] = 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        }
        // Thomas algorithm, unit off-diagonals
        for i in 1..n {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - m[i + 1]) / diag[i];
        }
        CubicSpline { dx, y, m }
    }

    /// Value at `x` (`|x|` is used, the fitted functions being even).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        let n = self.y.len();
        let s = x / self.dx;
        if s >= (n - 1) as f64 {
            return if s == (n - 1) as f64 { self.y[n - 1] } else { 0.0 };
        }
        let i = s.floor() as usize;
        let b = s - i as f64;
        let a = 1.0 - b;
        let h2 = self.dx * self.dx / 6.0;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2
    }

    /// Largest abscissa.
    pub fn x_max(&self) -> f64 {
        self.dx * (self.y.len() - 1) as f64
    }

    /// Node spacing.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Node values.
    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

/// `u = 4 sinh^2(v/2)`.
pub fn u_of_v(v: f64) -> f64 {
    let s = (0.5 * v).sinh();
    4.0 * s * s
}

/// `v = 2 asinh(sqrt(u)/2)`, the inverse of [`u_of_v`] on `u >= 0`.
pub fn v_of_u(u: f64) -> f64 {
    2.0 * (0.5 * u.max(0.0).sqrt()).asinh()
}

/// A function of `u >= 0` sampled on a grid uniform in `v = v_of_u(u)`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    spline: CubicSpline,
}

impl GridFunction {
    /// From values at `v_i = i dv`.
    pub fn from_v_values(dv: f64, values: Vec<f64>) -> Self {
        GridFunction { spline: CubicSpline::new(dv, values) }
    }

    /// Value at `u >= 0`; zero beyond the grid.
    pub fn eval(&self, u: f64) -> f64 {
        self.spline.eval(v_of_u(u))
    }

    /// Value at `v = v_of_u(u)`.
    pub fn eval_v(&self, v: f64) -> f64 {
        self.spline.eval(v)
    }

    /// Grid nodes `(u_i, value_i)`, strictly increasing in `u`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let dv = self.spline.dx();
        self.spline.values().iter().enumerate().map(move |(i, y)| (u_of_v(i as f64 * dv), *y))
    }

    /// Last abscissa in `u`.
    pub fn u_max(&self) -> f64 {
        u_of_v(self.spline.x_max())
    }

    /// Abscissa spacing in `v`.
    pub fn dv(&self) -> f64 {
        self.spline.dx()
    }

    /// Whether `(1 + u)^exponent |f(u)|` stays bounded on the grid, judged by
    /// its maximum not sitting in the last tenth of the nodes.
    pub fn decay_envelope_ok(&self, exponent: f64) -> bool {
        let w: Vec<f64> = self.nodes().map(|(u, y)| (1.0 + u).powf(exponent) * y.abs()).collect();
        let (arg, _) = w
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        arg < w.len() * 9 / 10
    }
}

/// Number of spline nodes for `g` and `Q'`.
const FINE_NODES: usize = 8192;

/// Number of nodes of the `V` and `Q` grids.
pub const GRID_NODES: usize = 4096;

/// Trapezoid step in `sigma` (with `w = sinh sigma`) for the `w`-integrals.
const SIGMA_STEP: f64 = 0.01;

/// The `h -> Phi/Q -> V` pipeline for one test function.
#[derive(Debug)]
pub struct SelbergPipeline {
    h: TestFunction,
    g: CubicSpline,
    dq: CubicSpline,
    v_grid: GridFunction,
    q_grid: GridFunction,
    roundtrip: OnceLock<GridFunction>,
}

/// `int_0^inf f(u + sinh^2 s) cosh s ds` by the trapezoid rule (the integrand
/// is even in `s`), stopping once `u + sinh^2 s` passes `u_end`.
fn sinh_integral<F: Fn(f64) -> f64>(f: F, u: f64, u_end: f64) -> f64 {
    let mut sum = 0.5 * f(u);
    let mut k = 1;
    loop {
        let s = k as f64 * SIGMA_STEP;
        let sh = s.sinh();
        let arg = u + sh * sh;
        if arg > u_end {
            break;
        }
        sum += f(arg) * s.cosh();
        k += 1;
    }
    sum * SIGMA_STEP
}

impl SelbergPipeline {
    /// Build all grids. Errors when `h` is not even or the declared decay is
    /// too weak for `V` to exist (`B > 2`, `A > 1`).
    pub fn new(h: &TestFunction) -> Result<Self> {
        if !h.is_even() {
            return Err(Error::InvalidInput(format!("{h} is not even")));
        }
        if !(h.decay > 2.0 && h.strip > 1.0) {
            return Err(Error::Precondition(format!(
                "V needs B > 2 and A > 1, declared B = {}, A = {}",
                h.decay, h.strip
            )));
        }
        let v_max = h.v_max();
        let r_max = h.r_max();
        let dr = (h.min_scale() / 10.0).min(PI / (4.0 * v_max));
        let nr = (r_max / dr).ceil() as usize;
        let dr = r_max / nr as f64;
        let rs: Vec<f64> = (0..=nr).map(|i| i as f64 * dr).collect();
        let hs: Vec<f64> = rs
            .iter()
            .enumerate()
            .map(|(i, r)| h.eval_real(*r) * if i == 0 { 0.5 } else { 1.0 })
            .collect();
        let dv = v_max / (FINE_NODES - 1) as f64;
        let mut g = Vec::with_capacity(FINE_NODES);
        let mut d = Vec::with_capacity(FINE_NODES);
        for i in 0..FINE_NODES {
            let v = i as f64 * dv;
            let mut gs = 0.0;
            let mut gp = 0.0;
            let mut g2 = 0.0;
            for (r, w) in rs.iter().zip(&hs) {
                let (s, c) = (r * v).sin_cos();
                gs += w * c;
                gp -= w * r * s;
                g2 -= w * r * r;
            }
            g.push(gs * dr / PI);
            // Q'(u) = g'(v) / (2 sinh v), with limit g''(0)/2 at v = 0
            d.push(if i == 0 { g2 * dr / (2.0 * PI) } else { gp * dr / (PI * 2.0 * v.sinh()) });
        }
        let g = CubicSpline::new(dv, g);
        let dq = CubicSpline::new(dv, d);
        let u_end = u_of_v(v_max);
        let dv_grid = v_max / (GRID_NODES - 1) as f64;
        let mut v_vals = Vec::with_capacity(GRID_NODES);
        let mut q_vals = Vec::with_capacity(GRID_NODES);
        for i in 0..GRID_NODES {
            let v0 = i as f64 * dv_grid;
            let u0 = u_of_v(v0);
            let integral = sinh_integral(|u| dq.eval(v_of_u(u)), u0, u_end);
            v_vals.push(-2.0 / PI * integral);
            q_vals.push(g.eval(v0));
        }
        Ok(SelbergPipeline {
            h: h.clone(),
            g,
            dq,
            v_grid: GridFunction::from_v_values(dv_grid, v_vals),
            q_grid: GridFunction::from_v_values(dv_grid, q_vals),
            roundtrip: OnceLock::new(),
        })
    }

    /// The test function.
    pub fn test_function(&self) -> &TestFunction {
        &self.h
    }

    /// `Phi(y)` for `y > 0`.
    pub fn phi(&self, y: f64) -> f64 {
        self.g.eval(y.ln())
    }

    /// `Q(u)`.
    pub fn q(&self, u: f64) -> f64 {
        self.g.eval(v_of_u(u))
    }

    /// `Q'(u)`.
    pub fn q_prime(&self, u: f64) -> f64 {
        self.dq.eval(v_of_u(u))
    }

    /// `V(u)` from the grid.
    pub fn v(&self, u: f64) -> f64 {
        self.v_grid.eval(u)
    }

    /// The `Q` grid.
    pub fn q_grid(&self) -> &GridFunction {
        &self.q_grid
    }

    /// The `V` grid.
    pub fn v_grid(&self) -> &GridFunction {
        &self.v_grid
    }

    /// `int_R V(u + x^2) dx`, the forward transform of the `V` grid.
    pub fn q_from_v(&self, u: f64) -> f64 {
        2.0 * sinh_integral(|w| self.v_grid.eval(w), u, self.v_grid.u_max())
    }

    fn roundtrip_grid(&self) -> &GridFunction {
        self.roundtrip.get_or_init(|| {
            let dv = self.v_grid.dv();
            let vals = (0..GRID_NODES).map(|i| self.q_from_v(u_of_v(i as f64 * dv))).collect();
            GridFunction::from_v_values(dv, vals)
        })
    }

    /// `h(t)` recovered from `V`: first `Q` by the forward transform, then
    /// `int_0^inf Phi(y) y^{it} dy/y = 2 int_0^inf g(v) cos(tv) dv`.
    pub fn roundtrip_h(&self, t: f64) -> f64 {
        let grid = self.roundtrip_grid();
        let dv = grid.dv();
        let vals = grid.spline.values();
        let mut s = 0.5 * vals[0];
        for (i, y) in vals.iter().enumerate().skip(1) {
            s += y * (t * i as f64 * dv).cos();
        }
        2.0 * s * dv
    }
}

/// `Q` on its grid.
pub fn q_from_h(h: &TestFunction) -> Result<GridFunction> {
    Ok(SelbergPipeline::new(h)?.q_grid().clone())
}

/// Route selector for [`v_zero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VZeroRoute {
    /// `(1/4 pi) int_R h(t) tanh(pi t) t dt`.
    Integral,
    /// `V(0)` from the inversion pipeline.
    Pipeline,
}

/// `int_0^inf h(t) tanh(pi t) t dt`.
pub fn spectral_moment(h: &TestFunction) -> Result<f64> {
    let q = Quadrature::new(Scheme::GaussKronrod, 1e-15, 1e-13, 5000)?;
    let est = q.integrate(
        |t| Complex64::new(h.eval_real(t) * (PI * t).tanh() * t, 0.0),
        0.0,
        h.r_max() * 1.2,
    )?;
    Ok(est.value.re)
}

/// `V(0)` by either route.
pub fn v_zero(h: &TestFunction, route: VZeroRoute) -> Result<f64> {
    match route {
        VZeroRoute::Integral => Ok(spectral_moment(h)? / (2.0 * PI)),
        VZeroRoute::Pipeline => Ok(SelbergPipeline::new(h)?.v(0.0)),
    }
}

/// Zagier's transform `Z(t) = int_H V(|z^2 + 1 - t^2/4|^2 / y^2) dy/y dx`.
///
/// With `w = t^2/4 - 1` and, at fixed `y`, the new variable
/// `r = (x^2 + y^2 - w) / y` in place of `x >= 0`, the argument of `V` becomes
/// `r^2 + 4w` and the measure `dy dr / sqrt(w + r y - y^2)`. The `y`-integral
/// runs over `{y > 0 : y^2 - r y - w <= 0}` and carries inverse square-root
/// endpoint singularities, which the tanh-sinh rule absorbs; the outer
/// `r`-integral uses `r = sinh(rho)`.
pub fn zagier_transform(p: &SelbergPipeline, t: f64) -> f64 {
    let w = t * t / 4.0 - 1.0;
    let u_end = p.v_grid().u_max();
    let ts = tanh_sinh_rule();
    let inner = |r: f64| -> f64 {
        let disc = r * r + 4.0 * w;
        if disc <= 0.0 {
            return 0.0;
        }
        let root = disc.sqrt();
        let hi = 0.5 * (r + root);
        let lo = (0.5 * (r - root)).max(0.0);
        if hi <= lo {
            return 0.0;
        }
        // y in (lo, hi), integrand 1 / sqrt((hi - y)(y - lo_root))
        let lo_root = 0.5 * (r - root);
        let c = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut s = 0.0;
        for &(x, wt, one_minus) in ts.iter() {
            for sign in [-1.0, 1.0] {
                // distances to the ends computed without cancellation
                let (d_hi, d_lo) = if sign > 0.0 {
                    (half * one_minus, (c + half * x) - lo_root)
                } else {
                    (hi - (c - half * x), (lo - lo_root) + half * one_minus)
                };
                let prod = d_hi * d_lo;
                if prod > 0.0 {
                    s += wt / prod.sqrt();
                }
            }
        }
        s * half
    };
    // For w < 0 the y-range is empty below r0 = sqrt(-4w) and jumps to a
    // full arc at r0, so the outer variable is q with r = sqrt(q^2 + r0^2).
    // For w >= 0 the two half-lines r = +-sinh(rho) are integrated apart.
    let rule = crate::quadrature::gauss_legendre(10);
    let rho_max = u_end.sqrt().asinh() + 0.5;
    let panels = (rho_max / 0.1).ceil() as usize;
    let hp = rho_max / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * hp;
        for (x, wt) in rule.0.iter().zip(&rule.1) {
            let rho = mid + 0.5 * hp * x;
            let q = rho.sinh();
            let jac = wt * 0.5 * hp * rho.cosh();
            if w < 0.0 {
                let val = p.v(q * q);
                if val != 0.0 {
                    let r = (q * q - 4.0 * w).sqrt();
                    total += jac * val * inner(r) * q / r;
                }
            } else {
                let val = p.v(q * q + 4.0 * w);
                if val != 0.0 {
                    total += jac * val * (inner(q) + inner(-q));
                }
            }
        }
    }
    total
}

/// Tanh-sinh nodes on `[0, 1)`: `(x, weight, 1 - x)`, mirrored by the caller.
fn tanh_sinh_rule() -> &'static [(f64, f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let h = 1.0 / 8.0;
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let t = k as f64 * h;
            let s = 0.5 * PI * t.sinh();
            let x = s.tanh();
            let one_minus = 1.0 / (s.exp() * s.cosh());
            let wt = h * 0.5 * PI * t.cosh() / (s.cosh() * s.cosh());
            // the integrands carry at worst an inverse square root at the ends
            if wt < 1e-18 * one_minus.sqrt() || one_minus < 1e-300 {
                break;
            }
            out.push((x, if k == 0 { 0.5 * wt } else { wt }, one_minus));
            k += 1;
        }
        out
    })
}

/// Route selector for [`zagier_hat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZagierRoute {
    /// Fourier transform of [`zagier_transform`].
    Geometric,
    /// `(i / 4a) int_R J_{2it}(4 pi a) h(t) t / cosh(pi t) dt`.
    Bessel,
}

/// `Z^(a) = int_R Z(t) e(-a t) dt` for `a != 0`.
pub fn zagier_hat(p: &SelbergPipeline, a: f64, route: ZagierRoute) -> Result<Complex64> {
    if a == 0.0 {
        return Err(Error::InvalidInput("a must be nonzero".into()));
    }
    match route {
        ZagierRoute::Geometric => {
            let nodes = zagier_nodes(p, a.abs());
            let s: f64 = nodes.iter().map(|(t, w, z)| w * z * (2.0 * PI * a * t).cos()).sum();
            Ok(Complex64::new(2.0 * s, 0.0))
        }
        ZagierRoute::Bessel => {
            let x = 4.0 * PI * a.abs();
            let t_max = p.test_function().r_max() * 1.1;
            let n = ((t_max / 0.02).ceil() as usize).max(200);
            let dt = t_max / n as f64;
            let h = p.test_function();
            let mut s = 0.0;
            for k in 1..=n {
                let t = k as f64 * dt;
                let j = JOrder::new(t).eval(x)?;
                s += j.im * h.eval_real(t) * t / (PI * t).cosh();
            }
            // the integrand is odd-paired: int_R = 2i int_0^inf Im J ...
            let val = -s * dt / (2.0 * a.abs());
            Ok(Complex64::new(val, 0.0))
        }
    }
}

/// Quadrature nodes `(t, weight, Z(t))` on `t >= 0` resolving `e(a t)`; the
/// one-sided square-root singularity of `Z` at `t = 2` is removed by
/// `t = 2 - s^2` on `[0, 2]`.
fn zagier_nodes(p: &SelbergPipeline, a: f64) -> Vec<(f64, f64, f64)> {
    use crate::quadrature::gauss_legendre;
    let rule = gauss_legendre(10);
    let mut out = Vec::new();
    let panels = 8 + (8.0 * a).ceil() as usize;
    let s_end = 2f64.sqrt();
    for k in 0..panels {
        let (lo, hi) = (s_end * k as f64 / panels as f64, s_end * (k + 1) as f64 / panels as f64);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            let t = 2.0 - s * s;
            let wt = w * 0.5 * (hi - lo) * 2.0 * s;
            out.push((t, wt, zagier_transform(p, t)));
        }
    }
    let t_end = (p.v_grid().u_max() + 4.0).sqrt();
    // Z decays like Q(t^2 - 4); stop at the first panel below 1e-13 of the peak
    let panel = 0.5 / a.max(1.0);
    let peak = out.iter().map(|n| n.2.abs()).fold(0.0, f64::max);
    let mut lo = 2.0;
    while lo < t_end {
        let hi = lo + panel;
        let mut panel_max: f64 = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            let z = zagier_transform(p, t);
            panel_max = panel_max.max(z.abs());
            out.push((t, w * 0.5 * (hi - lo), z));
        }
        if panel_max < 1e-13 * peak {
            break;
        }
        lo = hi;
    }
    out
}

/// Both sides of `int_0^inf r^(w) dw = r(0)/2` for `r(t) = V(t^2)`, where
/// `r^(w) = int_R V(t^2) e(w t) dt`. Returns `(lhs, rhs)`.
pub fn selfdual_half_integral(p: &SelbergPipeline) -> (f64, f64) {
    selfdual_half_integral_of(|u| p.v(u), p.v_grid().u_max())
}

/// [`selfdual_half_integral`] for an arbitrary `V` supported in `[0, u_end]`.
///
/// `r^(w)` is computed by the trapezoid rule on a uniform `t`-grid (spectrally
/// accurate for the smooth even `r`), then integrated over `w` until it has
/// decayed below `1e-13` of `r^(0)`.
pub fn selfdual_half_integral_of<F: Fn(f64) -> f64>(v: F, u_end: f64) -> (f64, f64) {
    let dt = 0.01;
    let t_end = u_end.sqrt();
    let n = (t_end / dt).ceil() as usize;
    let vals: Vec<f64> = (0..=n).map(|k| v((k as f64 * dt).powi(2)) * if k == 0 { 0.5 } else { 1.0 }).collect();
    let last = vals.iter().rposition(|x| *x != 0.0).unwrap_or(0);
    let vals = &vals[..=last];
    let r_hat = |w: f64| -> f64 {
        let (s, c) = (2.0 * PI * w * dt).sin_cos();
        // cos(2 pi w k dt) by the rotation recurrence, renormalized per block
        let (mut cr, mut ci) = (1.0, 0.0);
        let mut acc = 0.0;
        for (k, y) in vals.iter().enumerate() {
            if k % 256 == 0 {
                let (sk, ck) = (2.0 * PI * w * k as f64 * dt).sin_cos();
                cr = ck;
                ci = sk;
            }
            acc += y * cr;
            let nr = cr * c - ci * s;
            ci = cr * s + ci * c;
            cr = nr;
        }
        2.0 * acc * dt
    };
    let rhs = 0.5 * v(0.0);
    let peak = r_hat(0.0).abs();
    let dw = 0.01;
    let mut lhs = 0.5 * peak * dw;
    let mut quiet = 0;
    let mut k = 1;
    while quiet < 100 && k < 5000 {
        let val = r_hat(k as f64 * dw);
        lhs += val * dw;
        quiet = if val.abs() < 1e-13 * peak { quiet + 1 } else { 0 };
        k += 1;
    }
    (lhs, rhs)
}
