//! Gauss sums and generalized twisted Kloosterman sums
//!
//! `S_chi(a, b; n; c) = sum_{x x' = n mod c} conj(chi(x)) e((a x + b x') / c)`
//!
//! evaluated three ways: by direct enumeration, as a product of local factors
//! over the primes dividing `c`, and through the stationary-phase (Salié)
//! evaluation of the local twisted sums. The module also counts solutions of
//! quadratic congruences and certifies the two Weil-type bounds.
//!
//! All phases are exact rationals reduced modulo their denominator before a
//! single `sin_cos`, and sums are accumulated with Neumaier compensation.

use crate::arith::{self, factor, gcd, inv_mod, modulo, ord_p, tau};
use crate::characters::{unit_root, DirichletCharacter};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Compensated (Neumaier) summation of complex numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    /// Add one term.
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    /// Add a term `k * z` for a small integer multiplicity `k`.
    pub fn add_scaled(&mut self, z: Complex64, k: f64) {
        self.add(z * k);
    }

    /// The compensated total.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// Table of `e(k / l)` for `k` in `[0, l)`.
#[derive(Clone)]
struct Roots {
    l: u64,
    table: Option<Arc<Vec<Complex64>>>,
}

const ROOT_TABLE_LIMIT: u64 = 1 << 18;

thread_local! {
    static ROOT_CACHE: RefCell<HashMap<u64, Arc<Vec<Complex64>>>> = RefCell::new(HashMap::new());
    static INVERSE_CACHE: RefCell<HashMap<u64, Arc<Vec<u64>>>> = RefCell::new(HashMap::new());
    static LOCAL_CACHE: RefCell<HashMap<(String, u64), DirichletCharacter>> = RefCell::new(HashMap::new());
}

impl Roots {
    fn new(l: u64) -> Self {
        if l > ROOT_TABLE_LIMIT {
            return Roots { l, table: None };
        }
        let table = ROOT_CACHE.with(|c| {
            let mut c = c.borrow_mut();
            if c.len() > 256 {
                c.clear();
            }
            c.entry(l)
                .or_insert_with(|| {
                    Arc::new(
                        (0..l)
                            .map(|k| {
                                let (s, co) = (TAU * k as f64 / l as f64).sin_cos();
                                Complex64::new(co, s)
                            })
                            .collect(),
                    )
                })
                .clone()
        });
        Roots { l, table: Some(table) }
    }

    fn at(&self, k: i128) -> Complex64 {
        let r = k.rem_euclid(self.l as i128) as u64;
        match &self.table {
            Some(t) => t[r as usize],
            None => unit_root(r as i64, self.l),
        }
    }
}

/// Inverses modulo `q` of all residues (`0` for non-units), cached.
fn inverse_table(q: u64) -> Arc<Vec<u64>> {
    INVERSE_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > 4096 {
            c.clear();
        }
        c.entry(q)
            .or_insert_with(|| {
                Arc::new(
                    (0..q)
                        .map(|x| inv_mod(x as i64, q).unwrap_or(0))
                        .collect(),
                )
            })
            .clone()
    })
}

/// Local component of `chi` modulo `q = p^j`, cached per thread.
fn cached_local(chi: &DirichletCharacter, p: u64, q: u64) -> Result<DirichletCharacter> {
    let key = (chi.label(), q);
    if let Some(hit) = LOCAL_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(hit);
    }
    let loc = chi.local_component(p, q)?;
    LOCAL_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > 4096 {
            c.clear();
        }
        c.insert(key, loc.clone());
    });
    Ok(loc)
}

/// Evaluation strategy for [`kloosterman`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KloostermanMode {
    /// Enumerate every pair `(x, x')` with `x x' = n mod c`.
    Direct,
    /// Multiply the local factors over `p | c`, each summed directly.
    Factored,
    /// Like `Factored`, with local twisted sums of exponent at least two
    /// evaluated by stationary phase when its hypotheses hold.
    Salie,
}

/// The data addressing one sum `S_chi(a, b; n; c)`.
#[derive(Debug, Clone)]
pub struct KloostermanQuery {
    /// Coefficient of `x`.
    pub a: i64,
    /// Coefficient of `x'`.
    pub b: i64,
    /// Right-hand side of `x x' = n`, nonzero.
    pub n: i64,
    /// Modulus, a positive multiple of the character modulus.
    pub c: u64,
    /// The twisting character.
    pub chi: DirichletCharacter,
}

impl KloostermanQuery {
    /// Validated constructor: `N | c` and `n != 0`.
    pub fn new(a: i64, b: i64, n: i64, c: u64, chi: DirichletCharacter) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be nonzero".into()));
        }
        if c == 0 || c % chi.modulus() != 0 {
            return Err(Error::InvalidInput(format!(
                "c = {c} must be a positive multiple of the character modulus {}",
                chi.modulus()
            )));
        }
        Ok(KloostermanQuery { a, b, n, c, chi })
    }
}

/// `S_chi(a, b; n; c)` by the selected method.
pub fn kloosterman(q: &KloostermanQuery, mode: KloostermanMode) -> Result<Complex64> {
    match mode {
        KloostermanMode::Direct => Ok(kloosterman_direct(q)),
        KloostermanMode::Factored => kloosterman_factored(q, false),
        KloostermanMode::Salie => kloosterman_factored(q, true),
    }
}

fn kloosterman_direct(q: &KloostermanQuery) -> Complex64 {
    let c = q.c;
    let chi = &q.chi;
    let den = chi.den();
    let l = arith::lcm(den, c);
    let roots = Roots::new(l);
    let (sc, sd) = ((l / c) as i128, (l / den) as i128);
    let a = modulo(q.a, c) as i128;
    let b = modulo(q.b, c) as i128;
    let n = modulo(q.n, c);
    let mut acc = CompensatedSum::default();
    for x in 0..c {
        let Some(ang) = chi.angle(x as i64) else {
            continue;
        };
        let g = gcd(x as i64, c as i64);
        if n % g != 0 {
            continue;
        }
        let cg = c / g;
        let x0 = if cg == 1 {
            0
        } else {
            arith::mul_mod((n / g) % cg, inv_mod((x / g) as i64, cg).expect("coprime"), cg)
        };
        for j in 0..g {
            let xp = (x0 + j * cg) as i128;
            let num = -(ang as i128) * sd + (a * x as i128 + b * xp) * sc;
            acc.add(roots.at(num));
        }
    }
    acc.value()
}

fn kloosterman_factored(q: &KloostermanQuery, salie: bool) -> Result<Complex64> {
    let mut total = Complex64::new(1.0, 0.0);
    let n_mod = q.chi.modulus();
    for &(p, cp) in factor(q.c).pairs() {
        let pq = p.pow(cp);
        let rest = q.c / pq;
        let inv = inv_mod(rest as i64, pq)?;
        let np = ord_p(q.n, p).expect("n nonzero");
        let n_rest = q.n / (p.pow(np) as i64);
        let a_loc = arith::mul_mod(modulo(q.a, pq), inv, pq);
        let b_loc = arith::mul_mod(arith::mul_mod(modulo(q.b, pq), inv, pq), modulo(n_rest, pq), pq);
        let local = if n_mod % p == 0 {
            let chi_p = cached_local(&q.chi, p, pq)?;
            let shift = if np >= cp { 0 } else { arith::mul_mod(b_loc, p.pow(np), pq) };
            twisted_local(a_loc as i64, shift as i64, &chi_p, p, cp, salie)
        } else {
            constant_one_local(a_loc as i64, b_loc as i64, np, p, cp, salie)?
        };
        total *= local;
        if total == Complex64::new(0.0, 0.0) {
            break;
        }
    }
    Ok(total)
}

fn twisted_local(a: i64, b: i64, chi_p: &DirichletCharacter, p: u64, l: u32, salie: bool) -> Complex64 {
    if salie && l >= 2 && !(modulo(a, p) == 0 && modulo(b, p) == 0) {
        if let Ok(v) = salie_eval(a, b, p, l, chi_p) {
            return v;
        }
    }
    if chi_p.is_principal() {
        let v = if l == 1 { classical_prime(a, b, p) } else { classical_units(a, b, p.pow(l)) };
        return Complex64::new(v, 0.0);
    }
    twisted_direct(a, b, chi_p, p.pow(l))
}

/// `sum_{x in (Z/q)^*} conj(chi(x)) e((a x + b x^{-1}) / q)` by enumeration.
pub fn twisted_direct(a: i64, b: i64, chi: &DirichletCharacter, q: u64) -> Complex64 {
    let den = chi.den();
    let l = arith::lcm(den, q);
    let roots = Roots::new(l);
    let (sq, sd) = ((l / q) as i128, (l / den) as i128);
    let inv = inverse_table(q);
    let a = modulo(a, q) as i128;
    let b = modulo(b, q) as i128;
    let mut acc = CompensatedSum::default();
    for x in 1..q.max(2) {
        let x = x % q;
        if gcd(x as i64, q as i64) != 1 {
            continue;
        }
        let ang = chi.angle(x as i64).unwrap_or(0) as i128;
        let num = -ang * sd + (a * x as i128 + b * inv[x as usize] as i128) * sq;
        acc.add(roots.at(num));
    }
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    acc.value()
}

/// Classical Kloosterman sum `S(a, b; q)` over units.
fn classical(a: i64, b: i64, p: u64, r: u32, salie: bool) -> Result<Complex64> {
    if r == 1 {
        return Ok(Complex64::new(classical_prime(a, b, p), 0.0));
    }
    if !salie {
        return Ok(Complex64::new(classical_units(a, b, p.pow(r)), 0.0));
    }
    let q = p.pow(r);
    let chi = DirichletCharacter::principal(q)?;
    Ok(twisted_local(a, b, &chi, p, r, salie))
}

/// `S(a, b; p)` for a prime `p`, real since `x -> -x` conjugates the terms.
/// Inverses come from `x^{-1} = -(p / x) (p mod x)^{-1}` in one pass.
fn classical_prime(a: i64, b: i64, p: u64) -> f64 {
    let a = modulo(a, p);
    let b = modulo(b, p);
    if a == 0 || b == 0 {
        return if a == 0 && b == 0 { (p - 1) as f64 } else { -1.0 };
    }
    // S(a, b; p) = S(1, a b; p)
    let ab = mul_small(a, b, p);
    let mut hist = vec![0u32; p as usize];
    let mut inv = vec![0u64; p as usize];
    inv[1] = 1;
    for x in 1..p {
        if x > 1 {
            let i = inv[(p % x) as usize];
            inv[x as usize] = (p - mul_small(p / x, i, p)) % p;
        }
        let k = (x + mul_small(ab, inv[x as usize], p)) % p;
        hist[k as usize] += 1;
    }
    cosine_pairing(&hist)
}

/// `S(a, b; q) = sum_{x in (Z/q)^*} e((a x + b x^{-1}) / q)` for any `q`.
fn classical_units(a: i64, b: i64, q: u64) -> f64 {
    let a = modulo(a, q);
    let b = modulo(b, q);
    let mut hist = vec![0u32; q as usize];
    for x in 1..q {
        if let Ok(xi) = inv_mod(x as i64, q) {
            let k = (mul_small(a, x, q) + mul_small(b, xi, q)) % q;
            hist[k as usize] += 1;
        }
    }
    if q == 1 {
        return 1.0;
    }
    cosine_pairing(&hist)
}

/// `sum_k hist[k] cos(2 pi k / q)` with `q = hist.len()`; `e(k / q)` comes
/// from a rotation resynchronized every 64 steps.
fn cosine_pairing(hist: &[u32]) -> f64 {
    let q = hist.len() as f64;
    let (sn, cs) = (TAU / q).sin_cos();
    let step = Complex64::new(cs, sn);
    let mut w = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (k, &h) in hist.iter().enumerate() {
        if k % 64 == 0 {
            let (sn, cs) = (TAU * k as f64 / q).sin_cos();
            w = Complex64::new(cs, sn);
        }
        if h != 0 {
            acc += h as f64 * w.re;
        }
        w *= step;
    }
    acc
}

fn mul_small(a: u64, b: u64, m: u64) -> u64 {
    if m < 1 << 32 {
        a * b % m
    } else {
        arith::mul_mod(a, b, m)
    }
}

/// Ramanujan sum over units: `sum_{t in (Z/p^r)^*} e(a t / p^r)`.
fn ramanujan_prime_power(a_p: Option<u32>, p: u64, r: u32) -> f64 {
    if r == 0 {
        return 1.0;
    }
    let a_p = a_p.unwrap_or(u32::MAX);
    let pr = p.pow(r) as f64;
    if r <= a_p {
        pr - pr / p as f64
    } else if r == a_p + 1 {
        -pr / p as f64
    } else {
        0.0
    }
}

fn constant_one_local(a: i64, b: i64, k: u32, p: u64, l: u32, salie: bool) -> Result<Complex64> {
    let q = p.pow(l) as i64;
    let a = modulo(a, q as u64) as i64;
    let b = modulo(b, q as u64) as i64;
    let a_p = ord_p(a, p);
    let b_p = ord_p(b, p);
    if k < l {
        let ap = a_p.unwrap_or(u32::MAX);
        let bp = b_p.unwrap_or(u32::MAX);
        if (k as u64) > ap as u64 + bp as u64 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let lo = k.saturating_sub(ap);
        let hi = bp.min(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..=hi {
            let a2 = a / p.pow(k - i) as i64;
            let b2 = b / p.pow(i) as i64;
            acc += classical(a2, b2, p, l - k, salie)?;
        }
        Ok(acc * p.pow(k) as f64)
    } else {
        let mut acc = 0.0;
        for i in 0..=l {
            if b_p.map_or(true, |bp| i <= bp) {
                acc += ramanujan_prime_power(a_p, p, l - i) * p.pow(i) as f64;
            }
        }
        Ok(Complex64::new(acc, 0.0))
    }
}

/// Local factor `S_{chi_p}(a, b; p^k; p^l)` of the factorization over
/// `p | c`. With `chi_p = None` the local function is the constant one
/// (the prime does not divide the character modulus).
pub fn kloosterman_local(
    a: i64,
    b: i64,
    p: u64,
    k: u32,
    l: u32,
    chi_p: Option<&DirichletCharacter>,
) -> Result<Complex64> {
    if l == 0 {
        return Err(Error::InvalidInput("local modulus exponent must be >= 1".into()));
    }
    let q = p.pow(l);
    match chi_p {
        Some(chi) => {
            if chi.modulus() != q {
                return Err(Error::InvalidInput(format!(
                    "local character must have modulus {q}, got {}",
                    chi.modulus()
                )));
            }
            let shift = if k >= l { 0 } else { arith::mul_mod(modulo(b, q), p.pow(k), q) };
            Ok(twisted_direct(a, shift as i64, chi, q))
        }
        None => constant_one_local(a, b, k, p, l, false),
    }
}

/// Stationary-phase evaluation of the twisted sum
/// `sum_{x in (Z/p^l)^*} conj(chi(x)) e((a x + b x^{-1}) / p^l)` for `l >= 2`.
///
/// Writing `alpha = floor(l/2)`, `beta = l - alpha` and
/// `conj(chi(1 + z p^beta)) = e(B z / p^alpha)`, the sum localizes on the
/// roots `y` of `a y^2 + B y - b = 0 mod p^alpha`; for odd `l` each root
/// carries a quadratic Gauss sum over `z mod p`.
pub fn salie_eval(a: i64, b: i64, p: u64, l: u32, chi: &DirichletCharacter) -> Result<Complex64> {
    if l < 2 {
        return Err(Error::InvalidInput("stationary phase needs exponent l >= 2".into()));
    }
    let q = p.pow(l);
    if chi.modulus() != q {
        return Err(Error::InvalidInput(format!(
            "character modulus {} differs from p^l = {q}",
            chi.modulus()
        )));
    }
    if modulo(a, p) == 0 && modulo(b, p) == 0 {
        return Err(Error::Precondition(format!(
            "both a and b are divisible by {p}; reduce the sum first"
        )));
    }
    let alpha = l / 2;
    let beta = l - alpha;
    let pa = p.pow(alpha);
    let pb = p.pow(beta);
    let den = chi.den();
    let conj_angle = |x: u64| -> i128 { -(chi.angle(x as i64).expect("unit") as i128) };
    // B from conj(chi(1 + p^beta)) = e(B / p^alpha)
    let num = modulo(conj_angle(1 + pb) as i64, den) as u128 * pa as u128;
    if num % den as u128 != 0 {
        return Err(Error::InvalidInput("character is not linear on 1 + p^beta Z".into()));
    }
    let big_b = (num / den as u128) as i64 % pa as i64;
    let a_r = modulo(a, q) as i64;
    let b_r = modulo(b, q) as i64;
    let roots = quadratic_roots(a_r, big_b, -b_r, p, alpha);
    let l_den = arith::lcm(den, q) * p;
    let phase = Roots::new(l_den);
    let scale_q = (l_den / q) as i128;
    let scale_d = (l_den / den) as i128;
    let mut acc = CompensatedSum::default();
    for y in roots {
        if y % p == 0 {
            continue;
        }
        let yb = inv_mod(y as i64, q)? as i128;
        let base = conj_angle(y) * scale_d + (a_r as i128 * y as i128 + b_r as i128 * yb) * scale_q;
        let mut term = phase.at(base);
        if l % 2 == 1 {
            // G(y) = sum_{z mod p} conj(chi(1 + z p^alpha)) e(z (a y - b yb) / p^{alpha+1} + b yb z^2 / p)
            let mut g = CompensatedSum::default();
            let lin = a_r as i128 * y as i128 - b_r as i128 * yb;
            let s_lin = (l_den / (pa * p)) as i128;
            let s_quad = (l_den / p) as i128;
            for z in 0..p {
                let u = 1 + z * pa;
                let ang = conj_angle(u % q) * scale_d
                    + (z as i128) * lin * s_lin
                    + (b_r as i128 * yb % p as i128) * (z as i128 * z as i128) * s_quad;
                g.add(phase.at(ang));
            }
            term *= g.value();
        }
        acc.add(term);
    }
    Ok(acc.value() * pa as f64)
}

/// All residues `y mod p^e` with `a y^2 + b y + c = 0 mod p^e`, found by
/// lifting roots one `p`-adic digit at a time.
pub fn quadratic_roots(a: i64, b: i64, c: i64, p: u64, e: u32) -> Vec<u64> {
    let mut roots: Vec<u64> = vec![0];
    let mut m: u64 = 1;
    for _ in 0..e {
        let next_m = m * p;
        let mut next = Vec::new();
        for &r in &roots {
            for d in 0..p {
                let y = (r + d * m) as i128;
                let v = a as i128 * y * y + b as i128 * y + c as i128;
                if v.rem_euclid(next_m as i128) == 0 {
                    next.push(y as u64);
                }
            }
        }
        roots = next;
        m = next_m;
        if roots.is_empty() {
            break;
        }
    }
    roots
}

/// Method selector for [`gauss_sum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaussMode {
    /// `sum_{d mod M} chi(d) e(d m / M)` term by term.
    Direct,
    /// Through the Gauss sum of the primitive character and a Möbius sum.
    Formula,
}

/// Gauss sum `G_chi(m) = sum_{d mod M} chi(d) e(d m / M)`.
pub fn gauss_sum(chi: &DirichletCharacter, m: i64, mode: GaussMode) -> Complex64 {
    match mode {
        GaussMode::Direct => gauss_direct(chi, m),
        GaussMode::Formula => {
            let prim = chi.primitive();
            let tau0 = gauss_direct(&prim, 1);
            let ell = chi.modulus() / chi.conductor();
            let g = gcd(ell as i64, m);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in arith::divisors(g) {
                let mu = arith::mu(ell / a);
                if mu == 0 {
                    continue;
                }
                let term = prim.eval((ell / a) as i64) * prim.eval(m / a as i64).conj();
                acc += term * (a as f64 * mu as f64);
            }
            tau0 * acc
        }
    }
}

fn gauss_direct(chi: &DirichletCharacter, m: i64) -> Complex64 {
    let big_m = chi.modulus();
    let den = chi.den();
    let l = arith::lcm(den, big_m);
    let roots = Roots::new(l);
    let mm = modulo(m, big_m) as i128;
    let mut acc = CompensatedSum::default();
    for d in 0..big_m {
        if let Some(ang) = chi.angle(d as i64) {
            let num = ang as i128 * (l / den) as i128 + d as i128 * mm * (l / big_m) as i128;
            acc.add(roots.at(num));
        }
    }
    acc.value()
}

/// The value of a sum together with its two Weil-type bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeilCertificate {
    /// `S_chi(a, b; n; c)` (factored mode).
    pub value: Complex64,
    /// `tau(n) tau(c) (an, bn, c)^{1/2} c^{1/2} c_chi^{1/2}`.
    pub bound1: f64,
    /// `tau(n) tau(c) (an, bn, c)^{1/2} c^{1/2} c_chi^{1/4} prod_{p | c_chi} p^{1/4}`.
    pub bound2: f64,
    /// Whether `|value| <= bound1` and `|value| <= bound2` (up to 1e-9).
    pub satisfied: (bool, bool),
}

/// Evaluate the sum and both bounds.
pub fn weil_certificate(q: &KloostermanQuery) -> Result<WeilCertificate> {
    let value = kloosterman(q, KloostermanMode::Factored)?;
    let (bound1, bound2) = weil_bounds(q);
    let abs = value.norm();
    Ok(WeilCertificate {
        value,
        bound1,
        bound2,
        satisfied: (abs <= bound1 + 1e-9, abs <= bound2 + 1e-9),
    })
}

/// The two bounds of the certificate without evaluating the sum.
pub fn weil_bounds(q: &KloostermanQuery) -> (f64, f64) {
    let n = q.n.unsigned_abs();
    let an = (q.a as i128 * q.n as i128).rem_euclid(q.c as i128) as i64;
    let bn = (q.b as i128 * q.n as i128).rem_euclid(q.c as i128) as i64;
    let g = gcd(gcd(an, bn) as i64, q.c as i64) as f64;
    let cond = q.chi.conductor();
    let common = (tau(n) * tau(q.c)) as f64 * g.sqrt() * (q.c as f64).sqrt();
    let bound1 = common * (cond as f64).sqrt();
    let rad: f64 = factor(cond).primes().map(|p| (p as f64).powf(0.25)).product();
    let bound2 = common * (cond as f64).powf(0.25) * rad;
    (bound1, bound2)
}

/// Deterministic sample of `count` pairs `(a, b)` modulo `c`: the
/// degenerate pairs with zero entries, then residues spread by quadratic
/// and linear progressions.
pub fn sample_pairs(c: u64, count: usize) -> Vec<(i64, i64)> {
    let c = c as i64;
    let mut out = vec![(0, 0), (0, 1), (1, 0), (1, 1), (c - 1, 1)];
    out.truncate(count);
    let mut j = 0i64;
    while out.len() < count {
        j += 1;
        out.push(((7 * j * j + 3 * j + 1) % c, (11 * j + 5) % c));
    }
    out
}

/// Summary of the Weil certificates for one `(N, chi, c)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeilScanRow {
    /// Character modulus.
    #[serde(rename = "N")]
    pub level: u64,
    /// Character label.
    pub character: String,
    /// The modulus `c`.
    pub c: u64,
    /// Number of sums checked.
    pub sums: u64,
    /// Largest `|S|`.
    pub max_abs: f64,
    /// Largest `|S| / bound1` (conductor form).
    pub max_ratio1: f64,
    /// Largest `|S| / bound2` (radical form).
    pub max_ratio2: f64,
    /// Whether every sum satisfied both bounds.
    pub within_bounds: bool,
}

/// Weil certificates for every character modulo `N <= max_level`, every
/// `c <= max_c` with `N | c`, 20 sampled pairs `(a, b)` and `n in 1..=12`.
pub fn weil_scan(max_c: u64, max_level: u64) -> Result<Vec<WeilScanRow>> {
    let mut rows = Vec::new();
    for level in 1..=max_level {
        for chi in crate::characters::enumerate_characters(level)? {
            for c in (level..=max_c).step_by(level as usize) {
                let mut row = WeilScanRow {
                    level,
                    character: chi.label(),
                    c,
                    sums: 0,
                    max_abs: 0.0,
                    max_ratio1: 0.0,
                    max_ratio2: 0.0,
                    within_bounds: true,
                };
                for (a, b) in sample_pairs(c, 20) {
                    for n in 1..=12 {
                        let cert = weil_certificate(&KloostermanQuery::new(a, b, n, c, chi.clone())?)?;
                        let abs = cert.value.norm();
                        row.sums += 1;
                        row.max_abs = row.max_abs.max(abs);
                        row.max_ratio1 = row.max_ratio1.max(abs / cert.bound1);
                        row.max_ratio2 = row.max_ratio2.max(abs / cert.bound2);
                        row.within_bounds &= cert.satisfied.0 && cert.satisfied.1;
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// A witness for the sharpness of the second bound: a primitive character
/// modulo `p^3` (odd `p`) and `(a, -a)` with `S_chi(a, -a; p^3) = p^2`.
///
/// The stationary point of the phase sits at `y = 1` exactly when
/// `2a + B = 0 mod p^2`, where `B` is read off `chi` on `1 + pZ`; the search
/// runs over `a mod p^2` and returns the first exact hit.
pub fn example_p3_witness(p: u64) -> Result<(DirichletCharacter, i64, i64)> {
    if p < 3 || !arith::is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
    }
    let q = p.pow(3);
    let chi = DirichletCharacter::from_exponents(q, vec![vec![1]])?;
    let target = (p * p) as f64;
    for a in 1..(p * p) as i64 {
        if a % p as i64 == 0 {
            continue;
        }
        let s = salie_eval(a, -a, p, 3, &chi)?;
        if (s - Complex64::new(target, 0.0)).norm() < 1e-6 * target {
            return Ok((chi, a, -a));
        }
    }
    Err(Error::Tolerance(format!("no witness found modulo {q}")))
}

/// Side selector for [`selberg_identity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentitySide {
    /// `S_chi(a, b; n; c)`.
    Lhs,
    /// `sum_{d | (n, b, c)} conj(chi(d)) d S_chi(a, b n / d^2; c / d)`.
    Rhs,
}

/// One side of Selberg's identity for the generalized sums. Requires
/// `gcd(N, n) = 1` or `gcd(N, b) = 1`.
pub fn selberg_identity(q: &KloostermanQuery, side: IdentitySide) -> Result<Complex64> {
    let big_n = q.chi.modulus() as i64;
    if gcd(big_n, q.n) != 1 && gcd(big_n, q.b) != 1 {
        return Err(Error::Precondition(
            "Selberg's identity needs gcd(N, n) = 1 or gcd(N, b) = 1".into(),
        ));
    }
    match side {
        IdentitySide::Lhs => kloosterman(q, KloostermanMode::Direct),
        IdentitySide::Rhs => {
            let g = gcd(gcd(q.n, q.b) as i64, q.c as i64);
            let mut acc = Complex64::new(0.0, 0.0);
            for d in arith::divisors(g) {
                let bn = (q.b as i128 * q.n as i128 / (d as i128 * d as i128)) as i64;
                let sub = KloostermanQuery::new(q.a, bn, 1, q.c / d, q.chi.clone())?;
                acc += q.chi.eval(d as i64).conj() * d as f64 * kloosterman(&sub, KloostermanMode::Direct)?;
            }
            Ok(acc)
        }
    }
}

/// `S(a_{s(1)}, a_{s(2)}; a_{s(3)}; c)` for the constant-one twist, where `s`
/// is a permutation of `{0, 1, 2}`.
pub fn permuted_classical(args: [i64; 3], perm: [usize; 3], c: u64) -> Result<Complex64> {
    let mut seen = [false; 3];
    for &i in &perm {
        if i > 2 || seen[i] {
            return Err(Error::InvalidInput(format!("{perm:?} is not a permutation")));
        }
        seen[i] = true;
    }
    let one = DirichletCharacter::principal(1)?;
    let q = KloostermanQuery::new(args[perm[0]], args[perm[1]], args[perm[2]], c, one)?;
    kloosterman(&q, KloostermanMode::Direct)
}

/// Method selector for [`quad_solution_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Closed-form case analysis.
    Formula,
    /// Enumeration of `Z/p^n`.
    Brute,
}

/// Number of solutions of `a x^2 + B x + c = 0 mod p^n` and how many of
/// them are divisible by `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadCount {
    /// Total number of solutions modulo `p^n`.
    pub count: u64,
    /// Solutions divisible by `p`.
    pub divisible: u64,
}

/// Count solutions of `a x^2 + B x + c0 = 0 mod p^n` for `p` not dividing `a`.
pub fn quad_solution_count(a: i64, big_b: i64, c0: i64, p: u64, n: u32, mode: CountMode) -> Result<QuadCount> {
    if modulo(a, p) == 0 {
        return Err(Error::Precondition(format!("{p} divides the leading coefficient {a}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    match mode {
        CountMode::Brute => {
            let q = p.pow(n) as i128;
            let mut count = 0;
            let mut divisible = 0;
            for x in 0..q {
                let v = a as i128 * x * x + big_b as i128 * x + c0 as i128;
                if v.rem_euclid(q) == 0 {
                    count += 1;
                    if x % p as i128 == 0 {
                        divisible += 1;
                    }
                }
            }
            Ok(QuadCount { count, divisible })
        }
        CountMode::Formula => Ok(quad_formula(a, big_b, c0, p, n)),
    }
}

fn quad_formula(a: i64, big_b: i64, c0: i64, p: u64, n: u32) -> QuadCount {
    let disc = big_b as i128 * big_b as i128 - 4 * a as i128 * c0 as i128;
    let (delta, dprime) = if disc == 0 {
        (u32::MAX, 0i128)
    } else {
        let mut d = disc;
        let mut e = 0u32;
        while d % p as i128 == 0 {
            d /= p as i128;
            e += 1;
        }
        (e, d)
    };
    let pn = |e: u32| p.pow(e);
    let b_div = modulo(big_b, p) == 0;
    let c_div = modulo(c0, p) == 0;
    if p != 2 {
        let count = if delta >= n {
            pn(n / 2)
        } else if delta % 2 == 0 && arith::legendre((dprime % p as i128) as i64, p) == 1 {
            2 * pn(delta / 2)
        } else {
            0
        };
        let divisible = if count == 0 {
            0
        } else if delta > 0 {
            if b_div {
                count
            } else {
                0
            }
        } else if c_div {
            1
        } else {
            0
        };
        return QuadCount { count, divisible };
    }
    if modulo(big_b, 2) == 0 {
        let count = if delta == u32::MAX || delta >= n + 2 {
            pn(n / 2)
        } else if delta % 2 == 0 && delta >= 2 {
            let modulus = 1i128 << (n + 2 - delta).min(3);
            if dprime.rem_euclid(modulus) == 1 {
                pn((n + 1 - delta).min(2)) * pn(delta / 2 - 1)
            } else {
                0
            }
        } else {
            0
        };
        let divisible = if c_div { count } else { 0 };
        QuadCount { count, divisible }
    } else {
        let ok = disc.rem_euclid(8) == 1;
        QuadCount {
            count: if ok { 2 } else { 0 },
            divisible: if ok { 1 } else { 0 },
        }
    }
}
