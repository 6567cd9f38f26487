//! Exact integer arithmetic: factorization, the classical multiplicative
//! functions, divisor lists, modular inverses, the Chinese remainder theorem
//! and explicit generators for the unit groups `(Z/p^k)^*`.
//!
//! Everything here works on `u64`/`i64` values of desk scale. Factoring is
//! by trial division, which is deterministic and fast enough below `10^12`.

use crate::error::{Error, Result};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// Prime factorization of a positive integer, stored as `(p, e)` pairs
/// sorted by `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    /// The `(prime, exponent)` pairs in increasing order of the prime.
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    /// The distinct primes.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }

    /// The prime-power parts `p^e`.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.pairs.iter().map(|&(p, e)| (p, e, p.pow(e)))
    }

    /// The integer this factorization describes.
    pub fn value(&self) -> u64 {
        self.pairs.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// Exponent of `p`, zero when `p` does not divide the integer.
    pub fn exponent(&self, p: u64) -> u32 {
        self.pairs
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Whether the factorization is empty, i.e. describes 1.
    pub fn is_one(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Factor `n >= 1` by trial division. `factor(1)` is the empty product.
///
/// # Panics
///
/// Panics when `n == 0`.
pub fn factor(n: u64) -> Factorization {
    assert!(n >= 1, "factor requires n >= 1");
    let mut pairs = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            pairs.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5u64;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        pairs.push((m, 1));
    }
    Factorization { pairs }
}

/// Selector for [`multiplicative_fn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplicativeFn {
    /// Number of divisors.
    Tau,
    /// Sum of divisors.
    Sigma,
    /// Euler's totient.
    Phi,
    /// Möbius function.
    Mu,
    /// Index of `Gamma_0(n)` in `SL_2(Z)`: `n * prod_{p | n} (1 + 1/p)`.
    Psi,
}

/// Evaluate one of the classical multiplicative functions at `n >= 1`.
pub fn multiplicative_fn(n: u64, kind: MultiplicativeFn) -> i64 {
    let f = factor(n);
    let mut acc: i64 = 1;
    for &(p, e) in f.pairs() {
        let p = p as i64;
        let pe = p.pow(e);
        acc *= match kind {
            MultiplicativeFn::Tau => e as i64 + 1,
            MultiplicativeFn::Sigma => (pe * p - 1) / (p - 1),
            MultiplicativeFn::Phi => pe - pe / p,
            MultiplicativeFn::Mu => {
                if e > 1 {
                    return 0;
                }
                -1
            }
            MultiplicativeFn::Psi => pe + pe / p,
        };
    }
    acc
}

/// Number of divisors of `n`.
pub fn tau(n: u64) -> u64 {
    multiplicative_fn(n, MultiplicativeFn::Tau) as u64
}

/// Sum of the divisors of `n`.
pub fn sigma(n: u64) -> u64 {
    multiplicative_fn(n, MultiplicativeFn::Sigma) as u64
}

/// Euler's totient.
pub fn phi(n: u64) -> u64 {
    multiplicative_fn(n, MultiplicativeFn::Phi) as u64
}

/// Möbius function.
pub fn mu(n: u64) -> i64 {
    multiplicative_fn(n, MultiplicativeFn::Mu)
}

/// `psi(N) = [SL_2(Z) : Gamma_0(N)]`.
pub fn psi(n: u64) -> u64 {
    multiplicative_fn(n, MultiplicativeFn::Psi) as u64
}

/// All positive divisors of `n >= 1`, sorted increasingly.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factor(n).pairs() {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// `ord_p(n)`, or `None` when `n == 0` (the valuation is infinite).
pub fn ord_p(n: i64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let mut m = n.unsigned_abs();
    let mut e = 0;
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    Some(e)
}

/// Greatest common divisor of two signed integers, always nonnegative.
pub fn gcd(a: i64, b: i64) -> u64 {
    a.unsigned_abs().gcd(&b.unsigned_abs())
}

/// Least common multiple.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Reduce `a` into `[0, m)`.
pub fn modulo(a: i64, m: u64) -> u64 {
    a.rem_euclid(m as i64) as u64
}

/// `a * b mod m` without overflow.
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m`.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut b = base % m;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`; errors when `gcd(a, m) > 1`.
pub fn inv_mod(a: i64, m: u64) -> Result<u64> {
    if m == 1 {
        return Ok(0);
    }
    let r = modulo(a, m) as i64;
    let e = r.extended_gcd(&(m as i64));
    if e.gcd != 1 {
        return Err(Error::NotAUnit { value: a, modulus: m });
    }
    Ok(modulo(e.x, m))
}

/// Solve the simultaneous congruences `x = v_i mod m_i` for pairwise
/// coprime moduli. Returns `(x, prod m_i)` with `0 <= x < prod m_i`.
pub fn crt(residues: &[(i64, u64)]) -> Result<(u64, u64)> {
    let mut x: u64 = 0;
    let mut m: u64 = 1;
    for &(v, mi) in residues {
        if mi == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        if m.gcd(&mi) != 1 {
            return Err(Error::NonCoprimeModuli(m, mi));
        }
        let v = modulo(v, mi);
        // x + m * t = v (mod mi)
        let inv = inv_mod(m as i64, mi)?;
        let diff = modulo(v as i64 - (x % mi) as i64, mi);
        let t = mul_mod(diff, inv, mi);
        x += m * t;
        m *= mi;
    }
    Ok((x % m, m))
}

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n).pairs() == [(n, 1)]
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> i64 {
    let r = modulo(a, p);
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Multiplicative order of the unit `g` modulo `m`, given `phi(m)`.
fn unit_order(g: u64, m: u64, phi_m: u64) -> u64 {
    let mut order = phi_m;
    for &(q, _) in factor(phi_m).pairs() {
        while order % q == 0 && pow_mod(g, order / q, m) == 1 {
            order /= q;
        }
    }
    order
}

/// Generators and orders of `(Z/p^k)^*`, with a discrete-log table.
///
/// Conventions: `(Z/2)^*` is trivial; `(Z/4)^*` is generated by `3`;
/// `(Z/2^k)^*` for `k >= 3` is `{-1} x <5>` with generators `[2^k - 1, 5]`;
/// for odd `p` the smallest primitive root modulo `p^k` is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroupStructure {
    p: u64,
    k: u32,
    modulus: u64,
    generators: Vec<u64>,
    orders: Vec<u64>,
    /// `log[x]` is the mixed-radix index of the exponent vector of `x`,
    /// or `u32::MAX` when `x` is not a unit.
    log: Vec<u32>,
}

impl UnitGroupStructure {
    /// Build the structure for `p^k` with `p` prime and `k >= 1`.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) || k == 0 {
            return Err(Error::InvalidInput(format!(
                "unit group needs a prime power, got {p}^{k}"
            )));
        }
        let modulus = p.pow(k);
        if modulus > (1 << 26) {
            return Err(Error::InvalidInput(format!(
                "modulus {modulus} too large for a discrete-log table"
            )));
        }
        let phi_m = modulus - modulus / p;
        let (generators, orders) = if p == 2 {
            match k {
                1 => (vec![], vec![]),
                2 => (vec![3], vec![2]),
                _ => (vec![modulus - 1, 5], vec![2, modulus / 4]),
            }
        } else {
            let g = (2..modulus)
                .find(|&g| g % p != 0 && unit_order(g, modulus, phi_m) == phi_m)
                .expect("odd prime powers have primitive roots");
            (vec![g], vec![phi_m])
        };
        let mut log = vec![u32::MAX; modulus as usize];
        // Walk the product of cyclic factors in mixed radix order.
        let mut idx: u32 = 0;
        let mut first = 1u64;
        let n0 = orders.first().copied().unwrap_or(1);
        let n1 = orders.get(1).copied().unwrap_or(1);
        for _ in 0..n0 {
            let mut x = first;
            for _ in 0..n1 {
                log[x as usize] = idx;
                idx += 1;
                if generators.len() > 1 {
                    x = mul_mod(x, generators[1], modulus);
                }
            }
            if let Some(&g0) = generators.first() {
                first = mul_mod(first, g0, modulus);
            }
        }
        debug_assert_eq!(idx as u64, phi_m.max(1));
        Ok(UnitGroupStructure {
            p,
            k,
            modulus,
            generators,
            orders,
            log,
        })
    }

    /// The prime `p`.
    pub fn prime(&self) -> u64 {
        self.p
    }

    /// The exponent `k`.
    pub fn exponent(&self) -> u32 {
        self.k
    }

    /// The modulus `p^k`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Generators of the unit group.
    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// Orders of the generators; their product is `phi(p^k)`.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Exponent vector of the unit `x` on the generators.
    pub fn log(&self, x: i64) -> Result<Vec<u64>> {
        let r = modulo(x, self.modulus);
        let idx = self.log[r as usize];
        if idx == u32::MAX {
            return Err(Error::NotAUnit {
                value: x,
                modulus: self.modulus,
            });
        }
        Ok(match self.orders.len() {
            0 => vec![],
            1 => vec![idx as u64],
            _ => vec![idx as u64 / self.orders[1], idx as u64 % self.orders[1]],
        })
    }

    /// `prod g_i^{e_i} mod p^k`.
    pub fn exp(&self, exps: &[u64]) -> u64 {
        self.generators
            .iter()
            .zip(exps)
            .fold(1 % self.modulus, |acc, (&g, &e)| {
                mul_mod(acc, pow_mod(g, e, self.modulus), self.modulus)
            })
    }
}

/// Exponent vector of the unit `x` modulo the prime power `m = p^k` on the
/// canonical generators of [`UnitGroupStructure`].
pub fn unit_log(x: i64, m: u64) -> Result<Vec<u64>> {
    let f = factor(m);
    match f.pairs() {
        [(p, k)] => UnitGroupStructure::new(*p, *k)?.log(x),
        _ => Err(Error::InvalidInput(format!("{m} is not a prime power"))),
    }
}
