//! Eisenstein series attached to character pairs.
//!
//! For `omega'` mod `N` and a pair `(chi1, chi2)` with `chi1 chi2 = omega'`
//! and `c1 c2 | N`, the basis of the `K_1(N)`-fixed vectors is indexed by
//! tuples `(i_p)_{p | N}` with `ord_p(c2) <= i_p <= N_p - ord_p(c1)`. Each
//! tuple carries the integers
//!
//! * `M = prod p^{i_p}`,
//! * `N1 = prod_{i_p < N_p} p^{N_p}`,
//! * `N2 = prod_{i_p > 0} p^{N_p}`,
//!
//! the characters `chi1'` mod `N1` and `chi2'` mod `N2` built from the local
//! components of `chi1` and `chi2`, and a unimodular constant `C_{(i_p)}`.
//!
//! Characters in a [`CharacterPair`] are Dirichlet characters mod `N`; a
//! finite order Hecke character `chi` is represented by `chi'_N`, so that
//! the partial Hecke L-function `L_N(s, chi)` is the Dirichlet L-function of
//! `conj(chi'_N)` modulo `N`.
//!
//! The Eisenstein series is evaluated for the scaled element
//! `phi = C_{(i_p)}^{-1} phi_{(i_p)}` by two independent routes: the lattice
//! sum over coprime `(c, d)` (accelerated by Ewald splitting of the full
//! lattice sum) and the Fourier expansion, whose constant term and
//! K-Bessel series continue it meromorphically.

use crate::arith::{self, divisors, factor, gcd, lcm};
use crate::characters::{pairs_with_product, unit_root, CharacterPair, DirichletCharacter};
use crate::error::{Error, Result};
use crate::expsums::{gauss_sum, CompensatedSum, GaussMode};
use crate::specfun::{bessel_k, gamma_complex, gamma_inc_upper, hurwitz_zeta_regular};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Local index of a basis element at one prime `p | N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalIndex {
    /// The prime.
    pub p: u64,
    /// `N_p = ord_p(N)`.
    pub n_p: u32,
    /// The index `i_p`.
    pub i_p: u32,
}

/// One element `phi_{(i_p)}` of the orthogonal Eisenstein basis.
#[derive(Debug, Clone)]
pub struct EisensteinBasisElement {
    /// The pair `(chi1, chi2)` of characters mod `N`.
    pub pair: CharacterPair,
    /// The tuple `(i_p)`, one entry per prime dividing `N` in increasing order.
    pub tuple: Vec<LocalIndex>,
    /// `M = prod p^{i_p}`.
    pub m: u64,
    /// `N1 = prod_{i_p < N_p} p^{N_p}`.
    pub n1: u64,
    /// `N2 = prod_{i_p > 0} p^{N_p}`.
    pub n2: u64,
    /// `chi1'` modulo `N1`.
    pub chi1_prime: DirichletCharacter,
    /// `chi2'` modulo `N2`.
    pub chi2_prime: DirichletCharacter,
    /// `chi2'` viewed modulo `M` (it has the same zeros there).
    chi2_mod_m: DirichletCharacter,
    /// `C_{(i_p)} = prod_{p | N1} conj(chi1_p(M / p^{i_p}))`.
    pub constant: Complex64,
    /// `||phi_{(i_p)}||^2` as a reduced fraction `(numerator, denominator)`.
    pub norm_sq: (u64, u64),
}

impl EisensteinBasisElement {
    /// Build the element of `pair` with the given `i_p`, listed for the
    /// primes of `N` in increasing order.
    pub fn new(pair: CharacterPair, indices: &[u32]) -> Result<Self> {
        let n = pair.chi1.modulus();
        let f = factor(n);
        if indices.len() != f.pairs().len() {
            return Err(Error::InvalidInput(format!(
                "{} has {} prime factors but {} indices were given",
                n,
                f.pairs().len(),
                indices.len()
            )));
        }
        let (c1, c2) = (factor(pair.chi1.conductor()), factor(pair.chi2.conductor()));
        let mut tuple = Vec::with_capacity(indices.len());
        let (mut m, mut n1, mut n2) = (1u64, 1u64, 1u64);
        for (&(p, n_p), &i_p) in f.pairs().iter().zip(indices) {
            let lo = c2.exponent(p);
            let hi = n_p.checked_sub(c1.exponent(p));
            if hi.map_or(true, |hi| i_p < lo || i_p > hi) {
                return Err(Error::InvalidInput(format!(
                    "index i_{p} = {i_p} is outside [ord_p(c2), N_p - ord_p(c1)]"
                )));
            }
            m *= p.pow(i_p);
            if i_p < n_p {
                n1 *= p.pow(n_p);
            }
            if i_p > 0 {
                n2 *= p.pow(n_p);
            }
            tuple.push(LocalIndex { p, n_p, i_p });
        }
        let chi1_prime = pair.chi1.to_modulus(n1)?;
        let chi2_prime = pair.chi2.to_modulus(n2)?;
        let chi2_mod_m = pair.chi2.to_modulus(m)?;
        let mut constant = c64(1.0, 0.0);
        for li in tuple.iter().filter(|li| li.i_p < li.n_p) {
            let local = pair.chi1.local_component(li.p, li.p.pow(li.n_p))?;
            constant *= local.eval((m / li.p.pow(li.i_p)) as i64).conj();
        }
        let norm_sq = norm_fraction(&tuple);
        Ok(Self { pair, tuple, m, n1, n2, chi1_prime, chi2_prime, chi2_mod_m, constant, norm_sq })
    }

    /// The level `N`.
    pub fn level(&self) -> u64 {
        self.pair.chi1.modulus()
    }

    /// The nebentypus `omega' = chi1 chi2`.
    pub fn omega(&self) -> DirichletCharacter {
        self.pair.chi1.mul(&self.pair.chi2).expect("same modulus")
    }

    /// `||phi_{(i_p)}||^2` as a float.
    pub fn norm_sq_f64(&self) -> f64 {
        self.norm_sq.0 as f64 / self.norm_sq.1 as f64
    }

    /// Whether both characters are trivial.
    pub fn both_trivial(&self) -> bool {
        self.pair.chi1.is_principal() && self.pair.chi2.is_principal()
    }

    /// The tuple written as `p^i_p` factors, e.g. `2^1*3^0`.
    pub fn tuple_label(&self) -> String {
        let parts: Vec<String> = self.tuple.iter().map(|li| format!("{}^{}", li.p, li.i_p)).collect();
        if parts.is_empty() {
            "()".into()
        } else {
            parts.join("*")
        }
    }

    /// Dirichlet character `conj(chi1') chi2'` modulo `N`, whose L-function
    /// is the Hecke partial `L_N(s, chi1 conj(chi2))`.
    pub fn twist_mod_n(&self) -> DirichletCharacter {
        self.pair.chi1.conj().mul(&self.pair.chi2).expect("same modulus")
    }
}

fn norm_fraction(tuple: &[LocalIndex]) -> (u64, u64) {
    let (mut num, mut den) = (1u64, 1u64);
    for li in tuple {
        let p = li.p;
        let (a, b) = if li.i_p == li.n_p {
            (1, p.pow(li.n_p - 1) * (p + 1))
        } else if li.i_p == 0 {
            (p, p + 1)
        } else {
            (p - 1, p.pow(li.i_p) * (p + 1))
        };
        num *= a;
        den *= b;
        let g = gcd(num as i64, den as i64);
        num /= g;
        den /= g;
    }
    (num, den)
}

/// All basis elements for nebentypus `omega` modulo `n`: for every
/// admissible pair, its `tau(N / (c1 c2))` tuples in lexicographic order.
pub fn enumerate_basis(n: u64, omega: &DirichletCharacter) -> Result<Vec<EisensteinBasisElement>> {
    if omega.modulus() != n {
        return Err(Error::InvalidInput(format!(
            "nebentypus has modulus {} but the level is {n}",
            omega.modulus()
        )));
    }
    let f = factor(n);
    let mut out = Vec::new();
    for pair in pairs_with_product(omega)? {
        let (c1, c2) = (factor(pair.chi1.conductor()), factor(pair.chi2.conductor()));
        let ranges: Vec<(u32, u32)> = f
            .pairs()
            .iter()
            .map(|&(p, n_p)| (c2.exponent(p), n_p - c1.exponent(p)))
            .collect();
        let mut idx: Vec<u32> = ranges.iter().map(|r| r.0).collect();
        'tuples: loop {
            out.push(EisensteinBasisElement::new(pair.clone(), &idx)?);
            // odometer step, last prime fastest
            for k in (0..idx.len()).rev() {
                if idx[k] < ranges[k].1 {
                    idx[k] += 1;
                    continue 'tuples;
                }
                idx[k] = ranges[k].0;
            }
            break;
        }
    }
    Ok(out)
}

/// `||phi_{(i_p)}||^2` as a float; see [`EisensteinBasisElement::norm_sq`]
/// for the exact fraction.
pub fn basis_norm_sq(e: &EisensteinBasisElement) -> f64 {
    e.norm_sq_f64()
}

/// `phi_fin` at the bottom row `(c, d)` of a matrix in `SL_2(Z)`:
/// `C_{(i_p)} conj(chi1'(c / M)) chi2'(d)`, zero unless `M | c` and
/// `gcd(c / M, N1) = 1`.
pub fn phi_fin_value(e: &EisensteinBasisElement, c: i64, d: i64) -> Result<Complex64> {
    if gcd(c, d) != 1 {
        return Err(Error::InvalidInput(format!("({c}, {d}) is not a coprime pair")));
    }
    Ok(e.constant * scaled_phi(e, c, d))
}

/// `phi_fin` of the scaled element `C^{-1} phi_{(i_p)}`.
fn scaled_phi(e: &EisensteinBasisElement, c: i64, d: i64) -> Complex64 {
    if c % e.m as i64 != 0 {
        return c64(0.0, 0.0);
    }
    e.chi1_prime.eval(c / e.m as i64).conj() * e.chi2_prime.eval(d)
}

/// Variant selector for [`dirichlet_l`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LVariant {
    /// `sum chi(n) n^{-s}` for the character as given (Euler factors at the
    /// primes dividing its modulus are already absent).
    Full,
    /// Additionally remove the Euler factors at every prime dividing the
    /// given integer.
    Partial(u64),
}

/// `L(s, chi)` for `s != 1`, through the primitive character and Hurwitz
/// zeta values, then the Euler factors of the requested variant.
pub fn dirichlet_l(chi: &DirichletCharacter, s: Complex64, variant: LVariant) -> Result<Complex64> {
    let prim = chi.primitive();
    let q = prim.conductor();
    let one = c64(1.0, 0.0);
    let base = if q == 1 {
        if s == one {
            return Err(Error::Pole("L(s, principal) has a pole at s = 1".into()));
        }
        hurwitz_zeta_regular(s, 1.0)? + 1.0 / (s - 1.0)
    } else {
        let qf = q as f64;
        let mut acc = CompensatedSum::default();
        for a in 1..q {
            let v = prim.eval(a as i64);
            if v.norm() > 0.0 {
                acc.add(v * hurwitz_zeta_regular(s, a as f64 / qf)?);
            }
        }
        // The 1/(s-1) parts cancel because the character sum vanishes.
        acc.value() * (-s * qf.ln()).exp()
    };
    let mut strip = chi.modulus();
    if let LVariant::Partial(n) = variant {
        strip = lcm(strip, n);
    }
    let mut value = base;
    for p in factor(strip).primes() {
        if q % p != 0 {
            value *= one - prim.eval(p as i64) * (-s * (p as f64).ln()).exp();
        }
    }
    Ok(value)
}

/// `L(1 + 2it, chi)` on the edge of the critical strip.
pub fn dirichlet_l_line(chi: &DirichletCharacter, t: f64, variant: LVariant) -> Result<Complex64> {
    if t == 0.0 && chi.is_principal() {
        return Err(Error::Pole("L(1, principal) is a pole".into()));
    }
    dirichlet_l(chi, c64(1.0, 2.0 * t), variant)
}

/// Generalized divisor sum `sigma_s(chi1', chi2', m)`.
///
/// For `m != 0` this is
/// `M^{-(1+2s)} sum_{c | m, c > 0} conj(chi1'(c)) c^{-2s} G(m / c)` with the
/// Gauss sum `G(k) = sum_{d mod M} chi2'(d) e(d k / M)`. For `m = 0` it is
/// `phi(M) M^{-(1+2s)} L_{N1}(2s, omega)` when `chi2` is trivial and `0`
/// otherwise; the `m = 0` series converges only for `Re(s) > 1/2`, and the
/// L-value continues it elsewhere.
pub fn sigma_s(e: &EisensteinBasisElement, m: i64, s: Complex64) -> Result<Complex64> {
    if m == 0 {
        if s.re <= 0.5 {
            return Err(Error::InvalidInput(format!(
                "sigma_s(0) needs Re(s) > 1/2, got {s}"
            )));
        }
        return sigma_zero(e, s);
    }
    Ok(sigma_nonzero(e, m, s))
}

/// `sigma_s(0)` through its L-value, valid wherever that is finite.
fn sigma_zero(e: &EisensteinBasisElement, s: Complex64) -> Result<Complex64> {
    if !e.pair.chi2.is_principal() {
        return Ok(c64(0.0, 0.0));
    }
    let mf = e.m as f64;
    let l = dirichlet_l(&e.chi1_prime.conj(), 2.0 * s, LVariant::Full)?;
    Ok(arith::phi(e.m) as f64 * (-(1.0 + 2.0 * s) * mf.ln()).exp() * l)
}

fn sigma_nonzero(e: &EisensteinBasisElement, m: i64, s: Complex64) -> Complex64 {
    let mut acc = CompensatedSum::default();
    for (c, a) in sigma_coefficients(e, m) {
        acc.add(a * (-2.0 * s * (c as f64).ln()).exp());
    }
    acc.value() * (-(1.0 + 2.0 * s) * (e.m as f64).ln()).exp()
}

/// The `s`-independent data of `sigma_s(m)` for `m != 0`: pairs
/// `(c, conj(chi1'(c)) G(m / c))` over the positive divisors `c | m` with a
/// nonzero coefficient, so that
/// `sigma_s(m) = M^{-(1+2s)} sum a_c c^{-2s}`.
pub fn sigma_coefficients(e: &EisensteinBasisElement, m: i64) -> Vec<(u64, Complex64)> {
    let mut out = Vec::new();
    for c in divisors(m.unsigned_abs()) {
        let chi = e.chi1_prime.eval(c as i64);
        if chi.norm() == 0.0 {
            continue;
        }
        let g = gauss_sum(&e.chi2_mod_m, m / c as i64, GaussMode::Formula);
        if g.norm() > 1e-12 {
            out.push((c, chi.conj() * g));
        }
    }
    out
}

/// Hecke eigenvalue `lambda_n(chi1, chi2, s) =
/// n^s sum_{d | n} conj(chi1(d) chi2(n / d)) d^{-2s}` for `gcd(n, N) = 1`.
pub fn lambda_n_eis(n: u64, pair: &CharacterPair, s: Complex64) -> Result<Complex64> {
    let level = pair.chi1.modulus();
    if n == 0 || gcd(n as i64, level as i64) != 1 {
        return Err(Error::InvalidInput(format!("n = {n} must be positive and prime to {level}")));
    }
    let mut acc = CompensatedSum::default();
    for d in divisors(n) {
        let v = (pair.chi1.eval(d as i64) * pair.chi2.eval((n / d) as i64)).conj();
        acc.add(v * (-2.0 * s * (d as f64).ln()).exp());
    }
    Ok(acc.value() * (s * (n as f64).ln()).exp())
}

/// Evaluation route for [`eisenstein_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EisensteinMode {
    /// The lattice sum over coprime `(c, d)`; needs `Re(s) > 1/2`.
    Direct,
    /// The Fourier expansion; valid in the continued region.
    Fourier,
}

/// Residue at `s = 1/2`, present only when both characters are trivial.
pub fn residue_half(e: &EisensteinBasisElement) -> Result<f64> {
    if !e.both_trivial() {
        return Err(Error::Precondition(
            "no pole at s = 1/2: chi1 and chi2 are not both trivial".into(),
        ));
    }
    let mf = e.m as f64;
    let mut r = 3.0 * arith::phi(e.m) as f64 / (PI * mf * mf);
    for li in &e.tuple {
        let p = li.p as f64;
        r /= if li.i_p == li.n_p { 1.0 - 1.0 / (p * p) } else { 1.0 + 1.0 / p };
    }
    Ok(r)
}

/// Coefficients `(a, b)` of the constant term `a y^{1/2+s} + b y^{1/2-s}`
/// of the scaled Eisenstein series.
pub fn constant_term(e: &EisensteinBasisElement, s: Complex64) -> Result<(Complex64, Complex64)> {
    let a = if e.n1 == 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
    if !e.pair.chi2.is_principal() {
        return Ok((a, c64(0.0, 0.0)));
    }
    let w = s + 0.5;
    let denom = dirichlet_l(&e.twist_mod_n(), 1.0 + 2.0 * s, LVariant::Full)?;
    let b = PI.sqrt() * gamma_complex(s)? * sigma_zero(e, s)? / (gamma_complex(w)? * denom);
    Ok((a, b))
}

fn check_parity(e: &EisensteinBasisElement) -> Result<()> {
    if e.omega().parity() != 1 {
        return Err(Error::Precondition(
            "weight-zero Eisenstein series need an even nebentypus".into(),
        ));
    }
    Ok(())
}

/// Scaled Eisenstein series `E_phi(s, z)` for `phi = C^{-1} phi_{(i_p)}`.
///
/// Both routes require `omega'(-1) = 1`. The direct route needs
/// `Re(s) > 1/2`; the Fourier route refuses `|s - 1/2| < 1e-4` when the
/// pole is present, and reports the residue in the error.
pub fn eisenstein_eval(
    e: &EisensteinBasisElement,
    s: Complex64,
    z: Complex64,
    mode: EisensteinMode,
) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidInput(format!("z = {z} is not in the upper half-plane")));
    }
    check_parity(e)?;
    match mode {
        EisensteinMode::Direct => {
            if s.re <= 0.5 {
                return Err(Error::InvalidInput(format!(
                    "the lattice sum needs Re(s) > 1/2, got {s}"
                )));
            }
            eval_direct(e, s, z)
        }
        EisensteinMode::Fourier => {
            if e.both_trivial() && (s - 0.5).norm() < 1e-4 {
                return Err(Error::Pole(format!(
                    "s = {s} is within 1e-4 of the pole at 1/2 (residue {})",
                    residue_half(e)?
                )));
            }
            eval_fourier(e, s, z)
        }
    }
}

/// Fourier expansion: constant term plus the K-Bessel series.
fn eval_fourier(e: &EisensteinBasisElement, s: Complex64, z: Complex64) -> Result<Complex64> {
    let (x, y) = (z.re, z.im);
    let w = s + 0.5;
    let (a, b) = constant_term(e, s)?;
    let ly = y.ln();
    let mut value = a * (w * ly).exp() + b * ((1.0 - w) * ly).exp();
    let denom = dirichlet_l(&e.twist_mod_n(), 1.0 + 2.0 * s, LVariant::Full)?;
    let pref = 2.0 * y.sqrt() * (w * PI.ln()).exp() / (gamma_complex(w)? * denom);
    // K_s(u) ~ sqrt(pi / 2u) e^{-u}; stop once e^{-2 pi m y} is negligible.
    let m_max = ((46.0 + 2.0 * s.norm() + 2.0 * s.re.abs() * 10.0) / (2.0 * PI * y)).ceil() as i64 + 2;
    let mut acc = CompensatedSum::default();
    for m in 1..=m_max {
        let u = 2.0 * PI * m as f64 * y;
        let k = bessel_k(s, u)?;
        let ms = (s * (m as f64).ln()).exp();
        let plus = sigma_nonzero(e, m, s) * unit_root_f(m as f64 * x);
        let minus = sigma_nonzero(e, -m, s) * unit_root_f(-(m as f64) * x);
        acc.add(ms * k * (plus + minus));
    }
    value += pref * acc.value();
    Ok(value)
}

fn unit_root_f(theta: f64) -> Complex64 {
    let (sn, cs) = (2.0 * PI * theta).sin_cos();
    c64(cs, sn)
}

/// Lattice-sum route.
///
/// With `G(c, d) = conj(chi1'(c / M)) chi2'(d)` and `w = 1/2 + s`, the full
/// sum `Z = sum_{(c,d) != 0} G(c, d) |cz + d|^{-2w}` factors as
/// `2 L(2w, conj(chi1') chi2') S + [N1 = 1] 2 L(2w, chi2')`, where `S` is the
/// coprime sum over `c > 0`. `Z` itself is computed by Ewald splitting:
/// `G` is periodic modulo `P = lcm(M N1, N2)`, so the small-`t` half of the
/// Mellin integral is Poisson-summed over the dual lattice.
fn eval_direct(e: &EisensteinBasisElement, s: Complex64, z: Complex64) -> Result<Complex64> {
    let (x, y) = (z.re, z.im);
    let w = s + 0.5;
    let z_full = ewald_sum(e, w, x, y)?;
    let coprime_factor = dirichlet_l(&e.twist_mod_n(), 2.0 * w, LVariant::Full)?;
    let mut half = z_full / 2.0;
    if e.n1 == 1 {
        half -= dirichlet_l(&e.chi2_prime, 2.0 * w, LVariant::Full)?;
    }
    let coprime = half / coprime_factor;
    let lead = if e.n1 == 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) };
    Ok((w * y.ln()).exp() * (lead + coprime))
}

/// Exponent cutoff for both halves of the Ewald sum.
const EWALD_CUTOFF: f64 = 44.0;

fn ewald_sum(e: &EisensteinBasisElement, w: Complex64, x: f64, y: f64) -> Result<Complex64> {
    let p = lcm(e.m * e.n1, e.n2);
    let pf = p as f64;
    let mf = e.m as i64;
    // Weight G on residues and its two one-dimensional DFTs.
    let g1: Vec<Complex64> = (0..p as i64)
        .map(|c| if c % mf == 0 { e.chi1_prime.eval(c / mf).conj() } else { c64(0.0, 0.0) })
        .collect();
    let g2: Vec<Complex64> = (0..p as i64).map(|d| e.chi2_prime.eval(d)).collect();
    let dft = |g: &[Complex64]| -> Vec<Complex64> {
        (0..p)
            .map(|k| {
                let mut acc = CompensatedSum::default();
                for (j, v) in g.iter().enumerate() {
                    if v.norm() > 0.0 {
                        acc.add(v * unit_root((k * j as u64 % p) as i64, p));
                    }
                }
                acc.value()
            })
            .collect()
    };
    let (h1, h2) = (dft(&g1), dft(&g2));
    let idx = |v: i64| v.rem_euclid(p as i64) as usize;

    // Q*(k) >= min(1, 1/y^2); keep the dual incomplete-Gamma argument >= 1.5.
    let min_dual = (1.0f64).min(1.0 / (y * y));
    let alpha = (1.0 / (pf * y)).min(PI * min_dual / (1.5 * pf * pf));

    let pref = (w * PI.ln()).exp() / gamma_complex(w)?;
    let mut real = CompensatedSum::default();
    let r = EWALD_CUTOFF / (PI * alpha);
    let cmax = (r.sqrt() / y).floor() as i64;
    for c in -cmax..=cmax {
        let rem = r - (c as f64 * y).powi(2);
        if rem < 0.0 {
            continue;
        }
        let gc = g1[idx(c)];
        if gc.norm() == 0.0 {
            continue;
        }
        let centre = -(c as f64) * x;
        let lo = (centre - rem.sqrt()).ceil() as i64;
        let hi = (centre + rem.sqrt()).floor() as i64;
        for d in lo..=hi {
            if c == 0 && d == 0 {
                continue;
            }
            let gv = gc * g2[idx(d)];
            if gv.norm() == 0.0 {
                continue;
            }
            let q = (c as f64 * x + d as f64).powi(2) + (c as f64 * y).powi(2);
            let t = (-w * (PI * q).ln()).exp() * gamma_inc_upper(w, PI * alpha * q)?;
            real.add(gv * t);
        }
    }

    let mut dual = CompensatedSum::default();
    let rs = EWALD_CUTOFF * alpha * pf * pf / PI;
    let kmax = rs.sqrt().floor() as i64;
    let a1 = 1.0 - w;
    for k2 in -kmax..=kmax {
        let rem = rs - (k2 * k2) as f64;
        if rem < 0.0 {
            continue;
        }
        let hk2 = h2[idx(k2)];
        if hk2.norm() < 1e-14 {
            continue;
        }
        let centre = x * k2 as f64;
        let half_width = y * rem.sqrt();
        let lo = (centre - half_width).ceil() as i64;
        let hi = (centre + half_width).floor() as i64;
        for k1 in lo..=hi {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let hv = h1[idx(k1)] * hk2;
            if hv.norm() < 1e-14 {
                continue;
            }
            let qs = ((k1 as f64 - x * k2 as f64).powi(2) + (y * k2 as f64).powi(2)) / (y * y);
            let arg = PI * qs / (pf * pf);
            let t = ((w - 1.0) * arg.ln()).exp() * gamma_inc_upper(a1, arg / alpha)?;
            dual.add(hv * t);
        }
    }

    let g0 = g1[0] * g2[0];
    let h0 = h1[0] * h2[0];
    let scale = 1.0 / (pf * pf * y);
    let total = real.value()
        + dual.value() * scale
        + h0 * scale * ((w - 1.0) * alpha.ln()).exp() / (w - 1.0)
        - g0 * (w * alpha.ln()).exp() / w;
    Ok(pref * total)
}
