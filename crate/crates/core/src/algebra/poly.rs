use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use smallvec::SmallVec;

use super::modular::{valuation_int, ModContext};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Var {
    T,
    Z1,
    Z2,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::Z1 => write!(f, "z1"),
            Var::Z2 => write!(f, "z2"),
        }
    }
}

pub type Exponents = SmallVec<[u32; 3]>;

/// Sparse polynomial with exact integer coefficients.
///
/// Terms are keyed by exponent tuples aligned with `vars` and iterate in
/// lexicographic exponent order. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyZ {
    vars: Vec<Var>,
    terms: BTreeMap<Exponents, BigInt>,
}

impl PolyZ {
    pub fn zero(vars: &[Var]) -> Self {
        PolyZ {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[Var], c: impl Into<BigInt>) -> Self {
        let mut p = PolyZ::zero(vars);
        p.add_term(SmallVec::from_elem(0, vars.len()), c.into());
        p
    }

    pub fn one(vars: &[Var]) -> Self {
        PolyZ::constant(vars, 1)
    }

    /// The polynomial consisting of the single variable `v`.
    pub fn var(vars: &[Var], v: Var) -> Result<Self> {
        let idx = vars
            .iter()
            .position(|x| *x == v)
            .ok_or(Error::MissingVariable(v))?;
        let mut e: Exponents = SmallVec::from_elem(0, vars.len());
        e[idx] = 1;
        Ok(PolyZ::monomial(vars, e, 1))
    }

    pub fn monomial(vars: &[Var], exps: Exponents, c: impl Into<BigInt>) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent arity");
        let mut p = PolyZ::zero(vars);
        p.add_term(exps, c.into());
        p
    }

    pub fn from_terms<I, C>(vars: &[Var], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = PolyZ::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::ExponentArity {
                    expected: vars.len(),
                    got: e.len(),
                });
            }
            p.add_term(SmallVec::from_vec(e), c.into());
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponents, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Number of stored terms; [`PolyZ::is_zero`] is the emptiness test.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    fn index_of(&self, v: Var) -> Result<usize> {
        self.vars
            .iter()
            .position(|x| *x == v)
            .ok_or(Error::MissingVariable(v))
    }

    fn check_compatible(&self, other: &PolyZ) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::ArityMismatch {
                left: self.vars.clone(),
                right: other.vars.clone(),
            });
        }
        Ok(())
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, v: Var) -> Result<Option<u32>> {
        let i = self.index_of(v)?;
        Ok(self.terms.keys().map(|e| e[i]).max())
    }

    /// Smallest exponent of `v` among the terms.
    pub fn low_degree_in(&self, v: Var) -> Result<Option<u32>> {
        let i = self.index_of(v)?;
        Ok(self.terms.keys().map(|e| e[i]).min())
    }

    pub fn checked_add(&self, other: &PolyZ) -> Result<PolyZ> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &PolyZ) -> Result<PolyZ> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &PolyZ) -> Result<PolyZ> {
        self.check_compatible(other)?;
        let mut out = PolyZ::zero(&self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    /// `self^k` by repeated squaring; `self^0 = 1`.
    pub fn pow(&self, mut k: u64) -> PolyZ {
        let mut acc = PolyZ::one(&self.vars);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, c: &BigInt) -> PolyZ {
        if c.is_zero() {
            return PolyZ::zero(&self.vars);
        }
        PolyZ {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    /// Multiply by the monomial `v^k`.
    pub fn shift(&self, v: Var, k: u32) -> Result<PolyZ> {
        let i = self.index_of(v)?;
        Ok(PolyZ {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[i] += k;
                    (e, c.clone())
                })
                .collect(),
        })
    }

    /// Partial derivative with respect to `v`.
    pub fn derivative(&self, v: Var) -> Result<PolyZ> {
        let i = self.index_of(v)?;
        let mut out = PolyZ::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * BigInt::from(e[i]));
        }
        Ok(out)
    }

    /// Coefficient of `v^k`, as a polynomial in the remaining variables.
    pub fn coefficient_of(&self, v: Var, k: u32) -> Result<PolyZ> {
        let i = self.index_of(v)?;
        let rest: Vec<Var> = self.vars.iter().copied().filter(|x| *x != v).collect();
        let mut out = PolyZ::zero(&rest);
        for (e, c) in &self.terms {
            if e[i] == k {
                let mut e2 = e.clone();
                e2.remove(i);
                out.add_term(e2, c.clone());
            }
        }
        Ok(out)
    }

    /// Exact quotient `self / (v - root)`, where `root` does not involve `v`.
    ///
    /// Synthetic division in `v` with polynomial coefficients; fails if the
    /// remainder is nonzero.
    pub fn div_linear(&self, v: Var, root: &PolyZ) -> Result<PolyZ> {
        let i = self.index_of(v)?;
        let rest: Vec<Var> = self.vars.iter().copied().filter(|x| *x != v).collect();
        if root.vars != rest {
            return Err(Error::ArityMismatch {
                left: rest,
                right: root.vars.clone(),
            });
        }
        let deg = match self.degree_in(v)? {
            None => return Ok(self.clone()),
            Some(d) => d as usize,
        };
        let mut slices = vec![PolyZ::zero(&rest); deg + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2.remove(i) as usize;
            slices[k].add_term(e2, c.clone());
        }
        // q_{k-1} = c_k + root * q_k, from the top down; remainder is c_0 + root * q_0.
        let mut quotient = vec![PolyZ::zero(&rest); deg.max(1)];
        let mut carry = PolyZ::zero(&rest);
        for k in (1..=deg).rev() {
            let q = &slices[k] + &(root * &carry);
            quotient[k - 1] = q.clone();
            carry = q;
        }
        let remainder = &slices[0] + &(root * &carry);
        if !remainder.is_zero() {
            return Err(Error::InexactDivision { var: v });
        }
        let mut out = PolyZ::zero(&self.vars);
        for (k, q) in quotient.into_iter().enumerate() {
            for (e, c) in q.terms {
                let mut e2 = e;
                e2.insert(i, k as u32);
                out.add_term(e2, c);
            }
        }
        Ok(out)
    }

    /// Substitute `x -> x^k` in every variable.
    pub fn scale_exponents(&self, k: u32) -> PolyZ {
        PolyZ {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().map(|x| x * k).collect(), c.clone()))
                .collect(),
        }
    }

    /// Coefficients replaced by canonical residues in `[0, p^s)`, zero residues dropped.
    pub fn reduce(&self, ctx: &ModContext) -> PolyZ {
        let mut out = PolyZ::zero(&self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), ctx.reduce(c));
        }
        out
    }

    pub fn reduce_mod(&self, modulus: &BigInt) -> PolyZ {
        let mut out = PolyZ::zero(&self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.mod_floor(modulus));
        }
        out
    }

    /// Largest `k` with `p^k` dividing every coefficient; `None` for the zero polynomial.
    pub fn min_valuation(&self, p: u64) -> Option<u32> {
        self.terms
            .values()
            .map(|c| valuation_int(c, p).expect("stored coefficients are nonzero"))
            .min()
    }

    pub fn is_zero_mod(&self, modulus: &BigInt) -> bool {
        self.terms.values().all(|c| (c % modulus).is_zero())
    }

    /// Term list `(exponents, coefficient)` in deterministic order.
    pub fn term_list(&self) -> Vec<(Vec<u32>, BigInt)> {
        self.terms
            .iter()
            .map(|(e, c)| (e.to_vec(), c.clone()))
            .collect()
    }

    /// Add `delta` to the coefficient of `exps`; used for fault injection.
    pub fn perturbed(&self, exps: &[u32], delta: i64) -> PolyZ {
        let mut out = self.clone();
        out.add_term(SmallVec::from_slice(exps), BigInt::from(delta));
        out
    }
}

impl fmt::Display for PolyZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let a = c.abs();
            let is_const = e.iter().all(|x| *x == 0);
            if !a.is_one() || is_const {
                write!(f, "{a}")?;
            }
            let mut star = !a.is_one() && !is_const;
            for (v, k) in self.vars.iter().zip(e.iter()) {
                if *k == 0 {
                    continue;
                }
                if star {
                    write!(f, "*")?;
                }
                star = true;
                if *k == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &PolyZ {
    type Output = PolyZ;
    fn add(self, rhs: &PolyZ) -> PolyZ {
        self.checked_add(rhs).expect("polynomial addition")
    }
}

impl Sub for &PolyZ {
    type Output = PolyZ;
    fn sub(self, rhs: &PolyZ) -> PolyZ {
        self.checked_sub(rhs).expect("polynomial subtraction")
    }
}

impl Mul for &PolyZ {
    type Output = PolyZ;
    fn mul(self, rhs: &PolyZ) -> PolyZ {
        self.checked_mul(rhs).expect("polynomial multiplication")
    }
}

impl Neg for &PolyZ {
    type Output = PolyZ;
    fn neg(self) -> PolyZ {
        self.scale(&BigInt::from(-1))
    }
}

impl Mul<&PolyZ> for &BigInt {
    type Output = PolyZ;
    fn mul(self, rhs: &PolyZ) -> PolyZ {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TZ: [Var; 3] = [Var::T, Var::Z1, Var::Z2];
    const Z: [Var; 2] = [Var::Z1, Var::Z2];

    fn t() -> PolyZ {
        PolyZ::var(&TZ, Var::T).unwrap()
    }
    fn z1() -> PolyZ {
        PolyZ::var(&TZ, Var::Z1).unwrap()
    }
    fn z2() -> PolyZ {
        PolyZ::var(&TZ, Var::Z2).unwrap()
    }

    #[test]
    fn product_of_linear_factors() {
        let f = &(&t() - &z1()) * &(&t() - &z2());
        let expected = PolyZ::from_terms(
            &TZ,
            vec![
                (vec![2, 0, 0], 1),
                (vec![1, 1, 0], -1),
                (vec![1, 0, 1], -1),
                (vec![0, 1, 1], 1),
            ],
        )
        .unwrap();
        assert_eq!(f, expected);
    }

    #[test]
    fn pow_zero_and_cube() {
        let f = &t() - &z1();
        assert_eq!(f.pow(0), PolyZ::one(&TZ));
        let c = f.pow(3);
        let coeffs: Vec<i64> = (0..=3u32)
            .map(|k| c.coeff(&[3 - k, k, 0]).try_into().unwrap())
            .collect();
        assert_eq!(coeffs, vec![1, -3, 3, -1]);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let a = PolyZ::one(&TZ);
        let b = PolyZ::one(&Z);
        assert!(matches!(
            a.checked_add(&b),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            a.checked_mul(&b),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            PolyZ::from_terms(&Z, vec![(vec![1, 0, 0], 1)]),
            Err(Error::ExponentArity { .. })
        ));
    }

    #[test]
    fn reduce_examples() {
        let c3 = ModContext::new(3, 1).unwrap();
        let c9 = ModContext::new(3, 2).unwrap();
        let c25 = ModContext::new(5, 2).unwrap();
        let f = PolyZ::from_terms(&Z, vec![(vec![1, 0], 3), (vec![0, 1], 9)]).unwrap();
        assert!(f.reduce(&c3).is_zero());
        let g = PolyZ::from_terms(&Z, vec![(vec![1, 0], -1), (vec![0, 1], -1)]).unwrap();
        let g9 = PolyZ::from_terms(&Z, vec![(vec![1, 0], 8), (vec![0, 1], 8)]).unwrap();
        assert_eq!(g.reduce(&c9), g9);
        let h = PolyZ::from_terms(&Z, vec![(vec![1, 1], 5)]).unwrap();
        assert_eq!(h.reduce(&c25), h);
    }

    #[test]
    fn synthetic_division() {
        let f = &(&t() - &z1()) * &(&t() - &z2());
        let root = PolyZ::var(&Z, Var::Z1).unwrap();
        assert_eq!(f.div_linear(Var::T, &root).unwrap(), &t() - &z2());
        let g = &f + &PolyZ::one(&TZ);
        assert!(matches!(
            g.div_linear(Var::T, &root),
            Err(Error::InexactDivision { .. })
        ));
    }

    #[test]
    fn derivative_and_coefficient() {
        let f = (&t() - &z1()).pow(3);
        let d = f.derivative(Var::Z1).unwrap();
        assert_eq!(d, (&t() - &z1()).pow(2).scale(&BigInt::from(-3)));
        let c = f.coefficient_of(Var::T, 1).unwrap();
        assert_eq!(c, PolyZ::from_terms(&Z, vec![(vec![2, 0], 3)]).unwrap());
        assert_eq!(format!("{}", &t() - &z1()), "t - z1");
    }

    fn arb_poly() -> impl Strategy<Value = PolyZ> {
        prop::collection::vec(((0u32..4, 0u32..4), -40i64..40), 0..6).prop_map(|ts| {
            PolyZ::from_terms(&Z, ts.into_iter().map(|((a, b), c)| (vec![a, b], c))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn reduction_is_a_ring_morphism(f in arb_poly(), g in arb_poly(), p in prop::sample::select(vec![3u64, 5, 7]), s in 1u32..4) {
            let ctx = ModContext::new(p, s).unwrap();
            let lhs = (&f * &g).reduce(&ctx);
            let rhs = (&f.reduce(&ctx) * &g.reduce(&ctx)).reduce(&ctx);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn division_undoes_multiplication(f in arb_poly(), c in -5i64..5) {
            let lifted = PolyZ::from_terms(&TZ, f.term_list().into_iter().map(|(e, c)| (vec![e[0] % 3, e[0], e[1]], c))).unwrap();
            let root = PolyZ::from_terms(&Z, vec![(vec![1, 0], c), (vec![0, 1], 1)]).unwrap();
            let root_tz = PolyZ::from_terms(&TZ, vec![(vec![0, 1, 0], c), (vec![0, 0, 1], 1)]).unwrap();
            let prod = &lifted * &(&t() - &root_tz);
            prop_assert_eq!(prod.div_linear(Var::T, &root).unwrap(), lifted);
        }
    }
}
