use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::algebra::{is_odd_prime, PolyZ, Var};
use crate::error::{Error, Result};

/// Largest field size handled by exhaustive enumeration.
const MAX_ORDER: u64 = 1 << 20;

/// The finite field `F_p[x]/(f)` with `f` the smallest monic irreducible of degree `m`,
/// smallest meaning least `c_0 + c_1 p + ... + c_{m-1} p^{m-1}` over its lower coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fq {
    p: u64,
    m: u32,
    /// Monic reduction polynomial, lowest coefficient first, length `m + 1`.
    modulus: Vec<u64>,
}

/// Element of an [`Fq`]: `m` coefficients in `[0, p)`, lowest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem(Vec<u64>);

impl FqElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl std::fmt::Display for FqElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(":"))
    }
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    // b monic
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - c) * bi) % p;
            }
        }
        r.pop();
    }
    r
}

fn monic_from_index(index: u64, degree: u32, p: u64) -> Vec<u64> {
    let mut v = Vec::with_capacity(degree as usize + 1);
    let mut x = index;
    for _ in 0..degree {
        v.push(x % p);
        x /= p;
    }
    v.push(1);
    v
}

/// Brute-force irreducibility: no monic factor of degree `1..=deg/2` divides `f`.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = f.len() as u32 - 1;
    for d in 1..=deg / 2 {
        for idx in 0..p.pow(d) {
            let g = monic_from_index(idx, d, p);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    deg >= 1
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Fq {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidParameter(
                "extension degree must be positive".into(),
            ));
        }
        match p.checked_pow(m) {
            Some(q) if q <= MAX_ORDER => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "field of order {p}^{m} is too large"
                )))
            }
        }
        let modulus = (0..p.pow(m))
            .map(|idx| monic_from_index(idx, m, p))
            .find(|f| is_irreducible(f, p))
            .expect("irreducible polynomials exist in every degree");
        Ok(Fq { p, m, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.m)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FqElem {
        FqElem(vec![0; self.m as usize])
    }

    pub fn one(&self) -> FqElem {
        self.from_int(1)
    }

    pub fn from_int(&self, x: i64) -> FqElem {
        let mut v = vec![0; self.m as usize];
        v[0] = x.rem_euclid(self.p as i64) as u64;
        FqElem(v)
    }

    /// Reduce an arbitrary coefficient list (lowest first) into the field.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> FqElem {
        let v: Vec<u64> = coeffs
            .iter()
            .map(|c| c.rem_euclid(self.p as i64) as u64)
            .collect();
        self.reduce(v)
    }

    fn reduce(&self, v: Vec<u64>) -> FqElem {
        let mut r = if v.len() > self.m as usize {
            poly_rem(&v, &self.modulus, self.p)
        } else {
            v
        };
        r.resize(self.m as usize, 0);
        FqElem(r)
    }

    /// The element whose coefficients are the base-`p` digits of `index`.
    pub fn from_index(&self, index: u64) -> FqElem {
        let mut v = monic_from_index(index, self.m, self.p);
        v.pop();
        FqElem(v)
    }

    pub fn index(&self, a: &FqElem) -> u64 {
        a.0.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.order()).map(move |i| self.from_index(i))
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| (x + y) % self.p)
                .collect(),
        )
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        FqElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| (x + self.p - y) % self.p)
                .collect(),
        )
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        FqElem(a.0.iter().map(|x| (self.p - x) % self.p).collect())
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let m = self.m as usize;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, x) in a.0.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        self.reduce(prod)
    }

    pub fn pow(&self, a: &FqElem, mut k: u64) -> FqElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FqElem) -> Option<FqElem> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.order() - 2))
        }
    }

    pub fn frobenius(&self, a: &FqElem) -> FqElem {
        self.pow(a, self.p)
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self, a: &FqElem) -> Option<u64> {
        if a.is_zero() {
            return None;
        }
        let mut ord = self.order() - 1;
        for r in distinct_prime_factors(ord) {
            while ord.is_multiple_of(r) && self.pow(a, ord / r) == self.one() {
                ord /= r;
            }
        }
        Some(ord)
    }

    /// The first generator of the multiplicative group in index order.
    pub fn primitive_element(&self) -> FqElem {
        let q1 = self.order() - 1;
        self.elements()
            .find(|a| self.multiplicative_order(a) == Some(q1))
            .expect("the multiplicative group is cyclic")
    }

    /// Evaluate a polynomial in `(z1, z2)` with coefficients reduced mod `p`.
    pub fn eval(&self, f: &PolyZ, point: &[FqElem; 2]) -> FqElem {
        let pos: Vec<Option<usize>> = f
            .vars()
            .iter()
            .map(|v| match v {
                Var::Z1 => Some(0),
                Var::Z2 => Some(1),
                Var::T => None,
            })
            .collect();
        let pb = BigInt::from(self.p);
        let mut acc = self.zero();
        for (exps, c) in f.terms() {
            let c = c.mod_floor(&pb).to_u64().expect("reduced");
            if c == 0 {
                continue;
            }
            let mut term = self.from_int(c as i64);
            for (k, e) in exps.iter().enumerate() {
                match pos[k] {
                    Some(idx) => term = self.mul(&term, &self.pow(&point[idx], *e as u64)),
                    None => assert_eq!(*e, 0, "t must not occur"),
                }
            }
            acc = self.add(&acc, &term);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeometric::Z_VARS;

    #[test]
    fn smallest_irreducibles() {
        assert_eq!(Fq::new(3, 1).unwrap().modulus(), &[0, 1]);
        // x^2 + 1 is the first irreducible quadratic over F_3
        assert_eq!(Fq::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        // x^3 + 2x + 1 over F_3
        assert_eq!(Fq::new(3, 3).unwrap().modulus(), &[1, 2, 0, 1]);
        assert!(Fq::new(4, 1).is_err());
        assert!(Fq::new(3, 0).is_err());
    }

    #[test]
    fn field_axioms_by_enumeration() {
        for (p, m) in [(3u64, 1u32), (3, 2), (3, 3), (5, 2), (7, 1)] {
            let f = Fq::new(p, m).unwrap();
            assert!(is_irreducible(f.modulus(), p));
            let mut seen = std::collections::BTreeSet::new();
            for a in f.elements() {
                assert_eq!(f.from_index(f.index(&a)), a);
                seen.insert(a.clone());
                if !a.is_zero() {
                    let inv = f.inv(&a).unwrap();
                    assert_eq!(f.mul(&a, &inv), f.one());
                    assert_eq!((f.order() - 1) % f.multiplicative_order(&a).unwrap(), 0);
                }
                assert_eq!(f.pow(&a, f.order()), a);
            }
            assert_eq!(seen.len() as u64, f.order());
            let g = f.primitive_element();
            assert_eq!(f.multiplicative_order(&g), Some(f.order() - 1));
        }
    }

    #[test]
    fn evaluation() {
        let f = Fq::new(3, 1).unwrap();
        let h = PolyZ::from_terms(&Z_VARS, [(vec![1, 0], -1), (vec![0, 1], -1)]).unwrap();
        assert_eq!(f.eval(&h, &[f.from_int(0), f.from_int(1)]), f.from_int(2));
        assert!(f.eval(&h, &[f.from_int(1), f.from_int(2)]).is_zero());
    }
}
