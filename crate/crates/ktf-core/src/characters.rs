//! Dirichlet characters stored as exponent vectors on the canonical unit-group
//! generators of [`crate::arith::UnitGroupStructure`].
//!
//! A character modulo `N = prod p^{N_p}` is determined by one exponent vector
//! per prime power: `chi(g_i) = e(e_i / ord(g_i))` for each generator `g_i` of
//! `(Z/p^{N_p})^*`. Values are kept exactly as angle numerators over a common
//! denominator, so products of character values are exact until the final
//! conversion to a complex number.

use crate::arith::{self, crt, factor, gcd, modulo, UnitGroupStructure};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

/// `e(num / den) = exp(2 pi i num / den)` with the angle reduced first.
pub fn unit_root(num: i64, den: u64) -> Complex64 {
    let r = modulo(num, den);
    let (s, c) = (TAU * (r as f64) / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// Exponent vector attached to one prime power dividing the modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPart {
    /// The prime.
    pub p: u64,
    /// Its exponent in the modulus.
    pub k: u32,
    /// Exponents on the generators of `(Z/p^k)^*`.
    pub exps: Vec<u64>,
}

/// A Dirichlet character modulo `N`.
#[derive(Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    parts: Vec<LocalPart>,
    orders: Vec<Vec<u64>>,
    conductor: u64,
    den: u64,
    /// Angle numerator over `den` for every residue, `-1` off the units.
    table: Arc<Vec<i64>>,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletCharacter({}, cond {})", self.label(), self.conductor)
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.parts == other.parts
    }
}

impl Eq for DirichletCharacter {}

fn structures(modulus: u64) -> Result<Vec<UnitGroupStructure>> {
    factor(modulus)
        .pairs()
        .iter()
        .map(|&(p, k)| UnitGroupStructure::new(p, k))
        .collect()
}

impl DirichletCharacter {
    /// The principal character modulo `modulus`.
    pub fn principal(modulus: u64) -> Result<Self> {
        let groups = structures(modulus)?;
        let exps = groups.iter().map(|g| vec![0; g.orders().len()]).collect();
        Self::build(modulus, &groups, exps)
    }

    /// Build from one exponent vector per prime power of `modulus`, in
    /// increasing order of the primes.
    pub fn from_exponents(modulus: u64, exps: Vec<Vec<u64>>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        let groups = structures(modulus)?;
        if exps.len() != groups.len()
            || exps.iter().zip(&groups).any(|(e, g)| e.len() != g.orders().len())
        {
            return Err(Error::InvalidInput(format!(
                "exponent data {exps:?} does not match the unit group of {modulus}"
            )));
        }
        let exps = exps
            .into_iter()
            .zip(&groups)
            .map(|(e, g)| e.iter().zip(g.orders()).map(|(&x, &o)| x % o).collect())
            .collect();
        Self::build(modulus, &groups, exps)
    }

    fn build(modulus: u64, groups: &[UnitGroupStructure], exps: Vec<Vec<u64>>) -> Result<Self> {
        let orders: Vec<Vec<u64>> = groups.iter().map(|g| g.orders().to_vec()).collect();
        let den = orders.iter().flatten().fold(1u64, |a, &o| arith::lcm(a, o));
        let mut table = vec![-1i64; modulus as usize];
        // Per prime power, the angle numerator over `den` of every residue.
        let local: Vec<Vec<i64>> = groups
            .iter()
            .zip(&exps)
            .map(|(g, e)| {
                let q = g.modulus();
                (0..q)
                    .map(|x| match g.log(x as i64) {
                        Ok(l) => {
                            let mut acc: u128 = 0;
                            for ((li, ei), oi) in l.iter().zip(e).zip(g.orders()) {
                                acc += (*li as u128) * (*ei as u128) * (den / oi) as u128;
                            }
                            (acc % den as u128) as i64
                        }
                        Err(_) => -1,
                    })
                    .collect()
            })
            .collect();
        for (x, slot) in table.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            let mut unit = true;
            for (g, l) in groups.iter().zip(&local) {
                let v = l[x % g.modulus() as usize];
                if v < 0 {
                    unit = false;
                    break;
                }
                acc = (acc + v) % den as i64;
            }
            if unit {
                *slot = acc;
            }
        }
        if modulus == 1 {
            table[0] = 0;
        }
        let parts: Vec<LocalPart> = groups
            .iter()
            .zip(exps)
            .map(|(g, e)| LocalPart {
                p: g.prime(),
                k: g.exponent(),
                exps: e,
            })
            .collect();
        let mut chi = DirichletCharacter {
            modulus,
            parts,
            orders,
            conductor: 1,
            den,
            table: Arc::new(table),
        };
        chi.conductor = chi.compute_conductor();
        Ok(chi)
    }

    /// Build the character mod `modulus` whose angle at each unit is given
    /// by `angle(x) = (num, den)`; the closure is evaluated on lifts of the
    /// generators only.
    fn from_angle_fn<F>(modulus: u64, angle: F) -> Result<Self>
    where
        F: Fn(u64) -> Option<(i64, u64)>,
    {
        let groups = structures(modulus)?;
        let mut exps = Vec::with_capacity(groups.len());
        for (i, g) in groups.iter().enumerate() {
            let mut e = Vec::new();
            for (&gen, &ord) in g.generators().iter().zip(g.orders()) {
                let mut sys: Vec<(i64, u64)> = vec![(gen as i64, g.modulus())];
                for (j, h) in groups.iter().enumerate() {
                    if j != i {
                        sys.push((1, h.modulus()));
                    }
                }
                let (x, _) = crt(&sys)?;
                let (num, den) = angle(x).ok_or_else(|| {
                    Error::InvalidInput(format!("angle undefined at unit {x} mod {modulus}"))
                })?;
                let scaled = modulo(num, den) as u128 * ord as u128;
                if scaled % den as u128 != 0 {
                    return Err(Error::InvalidInput(format!(
                        "value at generator {gen} is not an {ord}-th root of unity"
                    )));
                }
                e.push((scaled / den as u128) as u64 % ord);
            }
            exps.push(e);
        }
        Self::build(modulus, &groups, exps)
    }

    fn compute_conductor(&self) -> u64 {
        let mut cond = 1u64;
        for part in &self.parts {
            let q = part.p.pow(part.k);
            // smallest f with chi trivial on units congruent to 1 mod p^f
            let mut f_found = part.k;
            for f in 0..=part.k {
                let pf = part.p.pow(f);
                let trivial = (0..q / pf).all(|j| {
                    let y = 1 + j * pf;
                    if y % part.p == 0 {
                        return true;
                    }
                    // embed y at p and 1 elsewhere
                    let mut sys = vec![(y as i64, q)];
                    for other in &self.parts {
                        if other.p != part.p {
                            sys.push((1, other.p.pow(other.k)));
                        }
                    }
                    let (x, _) = crt(&sys).expect("coprime prime powers");
                    self.table[x as usize] == 0
                });
                if trivial {
                    f_found = f;
                    break;
                }
            }
            cond *= part.p.pow(f_found);
        }
        cond
    }

    /// The modulus `N`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The conductor `c_chi`.
    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Common denominator of all angles.
    pub fn den(&self) -> u64 {
        self.den
    }

    /// Exponent data per prime power.
    pub fn parts(&self) -> &[LocalPart] {
        &self.parts
    }

    /// Whether this is the principal character.
    pub fn is_principal(&self) -> bool {
        self.parts.iter().all(|p| p.exps.iter().all(|&e| e == 0))
    }

    /// Whether the character is primitive.
    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    /// Angle numerator over [`Self::den`] at `n`, or `None` if `gcd(n, N) > 1`.
    pub fn angle(&self, n: i64) -> Option<i64> {
        let v = self.table[modulo(n, self.modulus) as usize];
        (v >= 0).then_some(v)
    }

    /// Raw angle table indexed by residue mod `N` (`-1` off the units).
    pub fn angle_table(&self) -> &Arc<Vec<i64>> {
        &self.table
    }

    /// `chi(n)` as a complex number; zero when `gcd(n, N) > 1`.
    pub fn eval(&self, n: i64) -> Complex64 {
        match self.angle(n) {
            Some(a) => unit_root(a, self.den),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `chi(-1)`, which is `1` or `-1`.
    pub fn parity(&self) -> i64 {
        let a = self.angle(-1).expect("-1 is a unit");
        if a == 0 {
            1
        } else {
            -1
        }
    }

    /// Canonical label `N:e1.e2...` (exponents concatenated over the primes).
    pub fn label(&self) -> String {
        let e: Vec<String> = self
            .parts
            .iter()
            .flat_map(|p| p.exps.iter().map(|e| e.to_string()))
            .collect();
        format!("{}:{}", self.modulus, e.join("."))
    }

    /// Parse a label produced by [`Self::label`].
    pub fn from_label(label: &str) -> Result<Self> {
        let (m, rest) = label
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("bad character label {label:?}")))?;
        let modulus: u64 = m
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad modulus in {label:?}")))?;
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        let flat: Vec<u64> = if rest.trim().is_empty() {
            vec![]
        } else {
            rest.split('.')
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidInput(format!("bad exponents in {label:?}")))?
        };
        let groups = structures(modulus)?;
        let total: usize = groups.iter().map(|g| g.orders().len()).sum();
        if flat.len() != total {
            return Err(Error::InvalidInput(format!(
                "label {label:?} needs {total} exponents"
            )));
        }
        let mut it = flat.into_iter();
        let exps = groups
            .iter()
            .map(|g| (0..g.orders().len()).map(|_| it.next().unwrap()).collect())
            .collect();
        Self::from_exponents(modulus, exps)
    }

    /// Complex conjugate character.
    pub fn conj(&self) -> Self {
        let exps = self
            .parts
            .iter()
            .zip(&self.orders)
            .map(|(p, o)| p.exps.iter().zip(o).map(|(&e, &oi)| (oi - e) % oi).collect())
            .collect();
        Self::from_exponents(self.modulus, exps).expect("same modulus")
    }

    /// Pointwise product of two characters with the same modulus.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(Error::InvalidInput(format!(
                "moduli {} and {} differ",
                self.modulus, other.modulus
            )));
        }
        let exps = self
            .parts
            .iter()
            .zip(&other.parts)
            .zip(&self.orders)
            .map(|((a, b), o)| {
                a.exps
                    .iter()
                    .zip(&b.exps)
                    .zip(o)
                    .map(|((&x, &y), &oi)| (x + y) % oi)
                    .collect()
            })
            .collect();
        Self::from_exponents(self.modulus, exps)
    }

    /// The character modulo `target` induced from the primitive character
    /// behind `self`. Requires `c_chi | target`.
    pub fn to_modulus(&self, target: u64) -> Result<Self> {
        if target == 0 || target % self.conductor != 0 {
            return Err(Error::InvalidInput(format!(
                "conductor {} does not divide {target}",
                self.conductor
            )));
        }
        if target == self.modulus {
            return Ok(self.clone());
        }
        let den = self.den;
        Self::from_angle_fn(target, |x| self.primitive_angle(x).map(|a| (a, den)))
    }

    /// Angle of the primitive character behind `self` at an integer `x`
    /// coprime to the conductor (`None` otherwise).
    fn primitive_angle(&self, x: u64) -> Option<i64> {
        if gcd(x as i64, self.conductor as i64) != 1 {
            return None;
        }
        // Find a lift of x mod conductor that is a unit mod N.
        let step = self.conductor;
        let mut y = x % step;
        if y == 0 {
            y = step;
        }
        for _ in 0..self.modulus.max(1) {
            if gcd(y as i64, self.modulus as i64) == 1 {
                return self.angle(y as i64);
            }
            y += step;
        }
        None
    }

    /// The primitive character inducing `self`.
    pub fn primitive(&self) -> Self {
        self.to_modulus(self.conductor).expect("conductor divides itself")
    }

    /// The `p`-component of `chi`, as a character modulo `target = p^j`
    /// (requires `ord_p(c_chi) <= j` and `j >= 1`). For `p` not dividing `N`
    /// the result is principal.
    pub fn local_component(&self, p: u64, target: u64) -> Result<Self> {
        let f = factor(target);
        let ok = matches!(f.pairs(), [(q, _)] if *q == p);
        if !ok {
            return Err(Error::InvalidInput(format!("{target} is not a power of {p}")));
        }
        let cond_p = p.pow(factor(self.conductor).exponent(p));
        if target % cond_p != 0 {
            return Err(Error::InvalidInput(format!(
                "local modulus {target} is not a multiple of the {p}-part {cond_p} of the conductor"
            )));
        }
        let Some(part) = self.parts.iter().find(|q| q.p == p) else {
            return Self::principal(target);
        };
        let q = p.pow(part.k);
        let mut sys_tail = Vec::new();
        for other in &self.parts {
            if other.p != p {
                sys_tail.push((1i64, other.p.pow(other.k)));
            }
        }
        let den = self.den;
        Self::from_angle_fn(target, |y| {
            let mut sys = vec![((y % q) as i64, q)];
            sys.extend_from_slice(&sys_tail);
            let (x, _) = crt(&sys).ok()?;
            self.angle(x as i64).map(|a| (a, den))
        })
    }

    /// All characters modulo `n` in canonical (lexicographic) order; the
    /// principal character comes first.
    pub fn enumerate(n: u64) -> Result<Vec<Self>> {
        let groups = structures(n)?;
        let orders: Vec<u64> = groups.iter().flat_map(|g| g.orders().to_vec()).collect();
        let total: u64 = orders.iter().product();
        let mut out = Vec::with_capacity(total as usize);
        let mut digits = vec![0u64; orders.len()];
        for _ in 0..total {
            let mut it = digits.iter();
            let exps = groups
                .iter()
                .map(|g| (0..g.orders().len()).map(|_| *it.next().unwrap()).collect())
                .collect();
            out.push(Self::build(n, &groups, exps)?);
            // increment, last digit fastest
            for i in (0..digits.len()).rev() {
                digits[i] += 1;
                if digits[i] < orders[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        Ok(out)
    }
}

/// Every character modulo `n`; see [`DirichletCharacter::enumerate`].
pub fn enumerate_characters(n: u64) -> Result<Vec<DirichletCharacter>> {
    DirichletCharacter::enumerate(n)
}

/// An ordered pair `(chi1, chi2)` of characters mod `N` with
/// `chi1 chi2 = omega'` and `c1 c2 | N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterPair {
    /// First character.
    pub chi1: DirichletCharacter,
    /// Second character.
    pub chi2: DirichletCharacter,
}

impl CharacterPair {
    /// Number of Eisenstein basis elements attached to the pair,
    /// `tau(N / (c1 c2))`.
    pub fn basis_dimension(&self) -> u64 {
        let n = self.chi1.modulus();
        arith::tau(n / (self.chi1.conductor() * self.chi2.conductor()))
    }
}

/// All ordered pairs with product `omega` and `c1 c2 | N`, ordered by the
/// canonical index of `chi1`.
pub fn pairs_with_product(omega: &DirichletCharacter) -> Result<Vec<CharacterPair>> {
    let n = omega.modulus();
    let mut out = Vec::new();
    for chi1 in DirichletCharacter::enumerate(n)? {
        let chi2 = omega.mul(&chi1.conj())?;
        if n % (chi1.conductor() * chi2.conductor()) == 0 {
            out.push(CharacterPair { chi1, chi2 });
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CharacterJson {
    modulus: u64,
    conductor: u64,
    exponents: Vec<(u64, u32, Vec<u64>)>,
}

impl Serialize for DirichletCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CharacterJson {
            modulus: self.modulus,
            conductor: self.conductor,
            exponents: self
                .parts
                .iter()
                .map(|p| (p.p, p.k, p.exps.clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirichletCharacter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = CharacterJson::deserialize(d)?;
        let exps = j.exponents.into_iter().map(|(_, _, e)| e).collect();
        let chi = DirichletCharacter::from_exponents(j.modulus, exps).map_err(D::Error::custom)?;
        if chi.conductor != j.conductor {
            return Err(D::Error::custom(format!(
                "stored conductor {} disagrees with computed {}",
                j.conductor, chi.conductor
            )));
        }
        Ok(chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::phi;

    /// Angle table of a character, used to check that enumerated
    /// characters are pairwise distinct.
    fn values(chi: &DirichletCharacter) -> Vec<i64> {
        (0..chi.modulus() as i64).map(|x| chi.angle(x).unwrap_or(-1)).collect()
    }

    fn brute_conductor(chi: &DirichletCharacter) -> u64 {
        let n = chi.modulus();
        arith::divisors(n)
            .into_iter()
            .find(|&d| {
                (1..n as i64)
                    .filter(|&x| gcd(x, n as i64) == 1 && (x - 1) % d as i64 == 0)
                    .all(|x| chi.angle(x) == Some(0))
            })
            .unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let c1 = enumerate_characters(1).unwrap();
        assert_eq!(c1.len(), 1);
        assert_eq!(c1[0].eval(17), Complex64::new(1.0, 0.0));
        let mut c5: Vec<u64> = enumerate_characters(5).unwrap().iter().map(|c| c.conductor()).collect();
        c5.sort();
        assert_eq!(c5, vec![1, 5, 5, 5]);
        let mut c8: Vec<u64> = enumerate_characters(8).unwrap().iter().map(|c| c.conductor()).collect();
        c8.sort();
        assert_eq!(c8, vec![1, 4, 8, 8]);
    }

    #[test]
    fn quadratic_mod_5() {
        let quad = enumerate_characters(5)
            .unwrap()
            .into_iter()
            .find(|c| !c.is_principal() && c.den() > 0 && c.mul(c).unwrap().is_principal())
            .unwrap();
        for x in 1..5i64 {
            let leg = arith::legendre(x, 5) as f64;
            assert!((quad.eval(x).re - leg).abs() < 1e-15);
        }
        assert!((quad.eval(2).re + 1.0).abs() < 1e-15);
        assert_eq!(quad.eval(5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn conductor_examples() {
        let p12 = DirichletCharacter::principal(12).unwrap();
        assert_eq!(p12.conductor(), 1);
        // quadratic character mod 8 induced from mod 4
        let from4 = enumerate_characters(8)
            .unwrap()
            .into_iter()
            .find(|c| c.conductor() == 4)
            .unwrap();
        assert_eq!(brute_conductor(&from4), 4);
        for chi in enumerate_characters(9).unwrap() {
            assert_eq!(chi.conductor(), brute_conductor(&chi));
        }
        assert!(enumerate_characters(9).unwrap().iter().any(|c| c.conductor() == 9));
    }

    #[test]
    fn structure_exhaustive_up_to_60() {
        for n in 1..=60u64 {
            let chars = enumerate_characters(n).unwrap();
            assert_eq!(chars.len() as u64, phi(n));
            let tables: Vec<Vec<i64>> = chars.iter().map(values).collect();
            for (i, chi) in chars.iter().enumerate() {
                assert_eq!(chi.conductor(), brute_conductor(chi), "N={n}");
                assert_eq!(chi.angle(1), Some(0));
                for m in 0..n as i64 {
                    for k in 0..n as i64 {
                        let lhs = chi.eval(m * k);
                        let rhs = chi.eval(m) * chi.eval(k);
                        assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
                let c = chi.conj();
                assert!(chars.contains(&c));
                for other in &chars {
                    assert!(chars.contains(&chi.mul(other).unwrap()));
                }
                // distinct value tables
                for (j, t) in tables.iter().enumerate() {
                    if j != i {
                        assert_ne!(t, &tables[i]);
                    }
                }
                // product of local components
                for x in 0..n as i64 {
                    let mut prod = Complex64::new(1.0, 0.0);
                    for &(p, k) in factor(n).pairs() {
                        let loc = chi.local_component(p, p.pow(k)).unwrap();
                        prod *= loc.eval(x);
                    }
                    assert!((prod - chi.eval(x)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn local_component_examples() {
        let chi15 = &enumerate_characters(15).unwrap()[5];
        let c3 = chi15.local_component(3, 3).unwrap();
        let c5 = chi15.local_component(5, 5).unwrap();
        for x in 1..15i64 {
            if gcd(x, 15) == 1 {
                assert!((c3.eval(x) * c5.eval(x) - chi15.eval(x)).norm() < 1e-12);
            }
        }
        let prim9 = enumerate_characters(9)
            .unwrap()
            .into_iter()
            .find(|c| c.is_primitive())
            .unwrap();
        let lifted = prim9.local_component(3, 27).unwrap();
        assert_eq!(lifted.conductor(), 9);
        for x in 1..27i64 {
            if x % 3 != 0 {
                assert!((lifted.eval(x) - prim9.eval(x)).norm() < 1e-12);
            }
        }
        let p = DirichletCharacter::principal(12).unwrap();
        assert!(p.local_component(5, 25).unwrap().is_principal());
        assert!(prim9.local_component(3, 3).is_err());
    }

    #[test]
    fn pairs_examples() {
        let one = DirichletCharacter::principal(1).unwrap();
        assert_eq!(pairs_with_product(&one).unwrap().len(), 1);
        let p7 = DirichletCharacter::principal(7).unwrap();
        let pairs = pairs_with_product(&p7).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].chi1.is_principal() && pairs[0].chi2.is_principal());
        let p9 = DirichletCharacter::principal(9).unwrap();
        let pairs = pairs_with_product(&p9).unwrap();
        // chi of conductor 1 or 3 paired with its conjugate
        let brute = enumerate_characters(9)
            .unwrap()
            .into_iter()
            .filter(|c| 9 % (c.conductor() * c.conductor()) == 0)
            .count();
        assert_eq!(pairs.len(), brute);
        assert_eq!(pairs.len(), 2);
        for n in 1..=60u64 {
            for omega in enumerate_characters(n).unwrap() {
                for pair in pairs_with_product(&omega).unwrap() {
                    assert!(pair.basis_dimension() >= 1);
                    assert_eq!(pair.chi1.mul(&pair.chi2).unwrap(), omega);
                }
            }
        }
    }

    #[test]
    fn induction_and_labels() {
        for chi in enumerate_characters(12).unwrap() {
            let prim = chi.primitive();
            assert!(prim.is_primitive());
            let up = chi.to_modulus(36).unwrap();
            assert_eq!(up.conductor(), chi.conductor());
            for x in 0..36i64 {
                if gcd(x, 6) == 1 {
                    assert!((up.eval(x) - chi.eval(x)).norm() < 1e-12);
                } else {
                    assert_eq!(up.eval(x), Complex64::new(0.0, 0.0));
                }
            }
            let back = DirichletCharacter::from_label(&chi.label()).unwrap();
            assert_eq!(back, chi);
            let json = serde_json::to_string(&chi).unwrap();
            let de: DirichletCharacter = serde_json::from_str(&json).unwrap();
            assert_eq!(de, chi);
        }
        assert_eq!(DirichletCharacter::principal(1).unwrap().label(), "1:");
        assert!(DirichletCharacter::from_label("1:").unwrap().is_principal());
    }
}
