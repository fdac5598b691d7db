//! Master polynomials and the p^s-hypergeometric data `T_s`, `I_s`.
//!
//! For an odd prime `p`, a level `s` and an odd `lambda` with `|lambda| < p^s`
//! the master polynomial is
//!
//! ```text
//! Phi_s(t; z; lambda) = t^((p^s - lambda)/2) (t - z1)^((p^s - 1)/2) (t - z2)^((p^s - 1)/2)
//! ```
//!
//! and `T_s`, `I_{s,1}`, `I_{s,2}` are the coefficients of `t^(p^s - 1)` in
//! `Phi_s`, `Phi_s / (t - z1)` and `Phi_s / (t - z2)`. Two independent
//! constructions are provided: direct expansion of the product, and the
//! anti-diagonal binomial sums. Each is the other's oracle.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;

use crate::algebra::{binom_exact, is_odd_prime, lucas_binom_mod_p, p_adic_digits, PolyZ, Var};
use crate::error::{Error, Result};
use crate::report::{CheckRecord, ModulusExponent};

pub const Z_VARS: [Var; 2] = [Var::Z1, Var::Z2];
pub const TZ_VARS: [Var; 3] = [Var::T, Var::Z1, Var::Z2];

/// Largest `p^s` for which the direct expansion path is used by default.
pub const DEFAULT_DEGREE_BUDGET: u64 = 343;

pub(crate) fn p_pow(p: u64, s: u32) -> Result<u64> {
    p.checked_pow(s)
        .filter(|x| *x < (1 << 40))
        .ok_or(Error::InvalidParameter(format!("{p}^{s} is too large")))
}

/// An odd `lambda` together with its level `e`: the least `e >= 1` with `|lambda| < p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LambdaSpec {
    pub p: u64,
    pub lambda: i64,
    pub e: u32,
}

impl LambdaSpec {
    pub fn new(p: u64, lambda: i64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if lambda.rem_euclid(2) != 1 {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} must be odd"
            )));
        }
        Ok(LambdaSpec {
            p,
            lambda,
            e: lambda_level(p, lambda),
        })
    }

    /// Whether `lambda` lies in `Λ_s`.
    pub fn in_level(&self, s: u32) -> bool {
        s >= self.e
    }
}

/// Least `e >= 1` with `|lambda| < p^e`.
pub fn lambda_level(p: u64, lambda: i64) -> u32 {
    let a = lambda.unsigned_abs();
    let mut e = 1;
    let mut pe = p;
    while pe <= a {
        pe *= p;
        e += 1;
    }
    e
}

/// `Λ_s`: odd integers strictly between `-p^s` and `p^s`, ascending.
pub fn lambda_range(p: u64, s: u32) -> Result<Vec<i64>> {
    let ps = p_pow(p, s)? as i64;
    Ok(((-ps + 1)..ps).filter(|l| l.rem_euclid(2) == 1).collect())
}

pub fn check_lambda(p: u64, s: u32, lambda: i64) -> Result<()> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if s == 0 {
        return Err(Error::ZeroExponent);
    }
    let ps = p_pow(p, s)? as i64;
    if lambda.rem_euclid(2) != 1 || lambda.abs() >= ps {
        return Err(Error::LambdaOutOfRange { p, s, lambda });
    }
    Ok(())
}

/// `((p^s - lambda)/2, (p^s - 1)/2)`.
pub(crate) fn half_exponents(p: u64, s: u32, lambda: i64) -> Result<(u64, u64)> {
    check_lambda(p, s, lambda)?;
    let ps = p_pow(p, s)? as i64;
    Ok((((ps - lambda) / 2) as u64, ((ps - 1) / 2) as u64))
}

fn tz_var(v: Var) -> PolyZ {
    PolyZ::var(&TZ_VARS, v).expect("t, z1, z2")
}

fn z_var(v: Var) -> PolyZ {
    PolyZ::var(&Z_VARS, v).expect("z1, z2")
}

fn to_u32(x: u64) -> u32 {
    u32::try_from(x).expect("exponent fits u32")
}

/// `(t - z1)^n1 (t - z2)^n2`.
fn linear_powers(n1: u64, n2: u64) -> PolyZ {
    let t = tz_var(Var::T);
    let a = (&t - &tz_var(Var::Z1)).pow(n1);
    let b = (&t - &tz_var(Var::Z2)).pow(n2);
    &a * &b
}

pub fn master_poly(p: u64, s: u32, lambda: i64) -> Result<PolyZ> {
    let (a, n) = half_exponents(p, s, lambda)?;
    linear_powers(n, n).shift(Var::T, to_u32(a))
}

/// `{f}_s`: the coefficient of `t^(p^s - 1)`.
pub fn bracket_s(f: &PolyZ, p: u64, s: u32) -> Result<PolyZ> {
    let ps = p_pow(p, s)?;
    f.coefficient_of(Var::T, to_u32(ps - 1))
}

/// The triple `(T_s, I_{s,1}, I_{s,2})` for fixed `(p, s, lambda)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFamily {
    pub p: u64,
    pub s: u32,
    pub lambda: i64,
    pub t: PolyZ,
    pub i: [PolyZ; 2],
}

impl SolutionFamily {
    pub fn i1(&self) -> &PolyZ {
        &self.i[0]
    }

    pub fn i2(&self) -> &PolyZ {
        &self.i[1]
    }

    /// `((1 - p^s)/2) I_s = grad T_s`, exactly over the integers.
    pub fn gradient_identity_holds(&self) -> bool {
        let ps = BigInt::from(self.p).pow(self.s);
        let factor = (BigInt::one() - ps) / 2;
        [Var::Z1, Var::Z2].iter().enumerate().all(|(j, v)| {
            let grad = self.t.derivative(*v).expect("z variable");
            grad == self.i[j].scale(&factor)
        })
    }

    /// Expected total degrees `((p^s - lambda)/2, (p^s - lambda)/2 - 1)`.
    pub fn degrees_consistent(&self) -> bool {
        let (a, _) = half_exponents(self.p, self.s, self.lambda).expect("valid family");
        self.t.total_degree() == Some(to_u32(a))
            && self
                .i
                .iter()
                .all(|x| x.total_degree() == Some(to_u32(a - 1)))
    }

    /// A copy with one coefficient of `I_{s,1}` shifted by one, for detector checks.
    pub fn perturbed(&self) -> SolutionFamily {
        let mut out = self.clone();
        let target = self
            .i1()
            .terms()
            .next()
            .map(|(e, _)| e.to_vec())
            .unwrap_or_else(|| vec![0, 0]);
        out.i[0] = self.i1().perturbed(&target, 1);
        out
    }
}

/// Direct expansion: `T = {Phi_s}_s`, `I_j = {Phi_s / (t - z_j)}_s` with exact synthetic division.
pub fn family_direct(p: u64, s: u32, lambda: i64) -> Result<SolutionFamily> {
    let phi = master_poly(p, s, lambda)?;
    let t = bracket_s(&phi, p, s)?;
    let psi1 = phi.div_linear(Var::T, &z_var(Var::Z1))?;
    let psi2 = phi.div_linear(Var::T, &z_var(Var::Z2))?;
    Ok(SolutionFamily {
        p,
        s,
        lambda,
        t,
        i: [bracket_s(&psi1, p, s)?, bracket_s(&psi2, p, s)?],
    })
}

/// Direct expansion shared across every `lambda` at a fixed level.
///
/// `Phi_s(lambda) = t^a P` with `P = ((t - z1)(t - z2))^((p^s-1)/2)` independent
/// of `lambda`, so `P` and the quotients `P / (t - z_j)` are expanded once and
/// each family is read off at `t^(p^s - 1 - a)`.
#[derive(Clone, Debug)]
pub struct DirectExpansion {
    pub p: u64,
    pub s: u32,
    base: PolyZ,
    quotients: [PolyZ; 2],
}

impl DirectExpansion {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        let (_, n) = half_exponents(p, s, 1)?;
        let base = linear_powers(n, n);
        let q1 = base.div_linear(Var::T, &z_var(Var::Z1))?;
        let q2 = base.div_linear(Var::T, &z_var(Var::Z2))?;
        Ok(DirectExpansion {
            p,
            s,
            base,
            quotients: [q1, q2],
        })
    }

    pub fn family(&self, lambda: i64) -> Result<SolutionFamily> {
        let (a, _) = half_exponents(self.p, self.s, lambda)?;
        let ps = p_pow(self.p, self.s)?;
        let k = to_u32(ps - 1 - a);
        Ok(SolutionFamily {
            p: self.p,
            s: self.s,
            lambda,
            t: self.base.coefficient_of(Var::T, k)?,
            i: [
                self.quotients[0].coefficient_of(Var::T, k)?,
                self.quotients[1].coefficient_of(Var::T, k)?,
            ],
        })
    }
}

/// `sign * sum_{k + l = degree} binom(n1, k) binom(n2, l) z1^k z2^l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AntiDiagonalSum {
    pub negative: bool,
    pub n1: u64,
    pub n2: u64,
    pub degree: u64,
}

impl AntiDiagonalSum {
    /// Range of `k` (the `z1` exponent) with nonzero terms.
    pub fn k_range(&self) -> std::ops::RangeInclusive<u64> {
        let lo = self.degree.saturating_sub(self.n2);
        let hi = self.degree.min(self.n1);
        lo..=hi
    }

    pub fn to_poly(&self) -> PolyZ {
        let row1 = exact_row(self.n1);
        let row2 = exact_row(self.n2);
        let sign = if self.negative { -1 } else { 1 };
        let terms = self.k_range().map(|k| {
            let l = self.degree - k;
            let c = &row1[k as usize] * &row2[l as usize] * sign;
            (vec![to_u32(k), to_u32(l)], c)
        });
        PolyZ::from_terms(&Z_VARS, terms).expect("two variables")
    }
}

fn exact_row(n: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

/// The three anti-diagonal sums giving `T_s`, `I_{s,1}`, `I_{s,2}` in closed form.
pub fn closed_form_sums(p: u64, s: u32, lambda: i64) -> Result<[AntiDiagonalSum; 3]> {
    let (a, n) = half_exponents(p, s, lambda)?;
    let t = AntiDiagonalSum {
        negative: a % 2 == 1,
        n1: n,
        n2: n,
        degree: a,
    };
    let i1 = AntiDiagonalSum {
        negative: (a - 1) % 2 == 1,
        n1: n - 1,
        n2: n,
        degree: a - 1,
    };
    let i2 = AntiDiagonalSum {
        n1: n,
        n2: n - 1,
        ..i1
    };
    Ok([t, i1, i2])
}

pub fn family_closed_form(p: u64, s: u32, lambda: i64) -> Result<SolutionFamily> {
    let [t, i1, i2] = closed_form_sums(p, s, lambda)?;
    Ok(SolutionFamily {
        p,
        s,
        lambda,
        t: t.to_poly(),
        i: [i1.to_poly(), i2.to_poly()],
    })
}

/// Direct expansion when `p^s` is within `budget`, closed form otherwise.
pub fn family(p: u64, s: u32, lambda: i64, budget: u64) -> Result<SolutionFamily> {
    if p_pow(p, s)? <= budget {
        family_direct(p, s, lambda)
    } else {
        family_closed_form(p, s, lambda)
    }
}

/// Families for many `(s, lambda)` cells at one prime, built in parallel and
/// read-only afterwards.
#[derive(Clone, Debug, Default)]
pub struct FamilyCache {
    families: HashMap<(u32, i64), SolutionFamily>,
}

impl FamilyCache {
    pub fn build(p: u64, cells: &[(u32, i64)], budget: u64) -> Result<Self> {
        let mut by_level: HashMap<u32, Vec<i64>> = HashMap::new();
        for (s, l) in cells {
            by_level.entry(*s).or_default().push(*l);
        }
        let mut levels: Vec<(u32, Vec<i64>)> = by_level.into_iter().collect();
        levels.sort();
        let mut families = HashMap::new();
        for (s, mut lambdas) in levels {
            lambdas.sort();
            lambdas.dedup();
            let built: Vec<SolutionFamily> = if p_pow(p, s)? <= budget {
                let direct = DirectExpansion::new(p, s)?;
                lambdas
                    .par_iter()
                    .map(|l| direct.family(*l))
                    .collect::<Result<_>>()?
            } else {
                lambdas
                    .par_iter()
                    .map(|l| family_closed_form(p, s, *l))
                    .collect::<Result<_>>()?
            };
            for f in built {
                families.insert((f.s, f.lambda), f);
            }
        }
        Ok(FamilyCache { families })
    }

    pub fn get(&self, s: u32, lambda: i64) -> Option<&SolutionFamily> {
        self.families.get(&(s, lambda))
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }
}

/// Base-`p` digits `w_0, ..., w_{s-1}` of `(p^s - lambda)/2`; all later digits of
/// `-lambda/2` equal `(p - 1)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitVector {
    pub p: u64,
    pub s: u32,
    pub lambda: i64,
    pub digits: Vec<u64>,
    pub tail: u64,
    pub distinct: BTreeSet<u64>,
}

impl DigitVector {
    /// `w_i(lambda)` for any `i`, including the tail.
    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(self.tail)
    }
}

pub fn digits(p: u64, s: u32, lambda: i64) -> Result<DigitVector> {
    let (a, _) = half_exponents(p, s, lambda)?;
    let digits = p_adic_digits(a, p, s as usize);
    debug_assert_eq!(digits.len(), s as usize);
    let tail = (p - 1) / 2;
    let mut distinct: BTreeSet<u64> = digits.iter().copied().collect();
    distinct.insert(tail);
    Ok(DigitVector {
        p,
        s,
        lambda,
        digits,
        tail,
        distinct,
    })
}

/// `W(lambda)`, the distinct p-adic digits of `-lambda/2`.
pub fn digit_set(p: u64, lambda: i64) -> Result<BTreeSet<u64>> {
    Ok(digits(p, lambda_level(p, lambda), lambda)?.distinct)
}

/// `h(z; w)`, `g1(z; w)`, `g2(z; w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitPolys {
    pub w: u64,
    pub h: PolyZ,
    pub g: [PolyZ; 2],
}

pub fn digit_polys(p: u64, w: u64) -> Result<DigitPolys> {
    if !is_odd_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    if w >= p {
        return Err(Error::DigitOutOfRange { p, w });
    }
    let n = (p - 1) / 2;
    let wt = to_u32(w);
    let top = to_u32(p - 1);
    let extract = |f: PolyZ| -> Result<PolyZ> { f.shift(Var::T, wt)?.coefficient_of(Var::T, top) };
    Ok(DigitPolys {
        w,
        h: extract(linear_powers(n, n))?,
        g: [
            extract(linear_powers(n - 1, n))?,
            extract(linear_powers(n, n - 1))?,
        ],
    })
}

/// `digit_polys(p, w)` for every `w` in `0..p`.
pub fn digit_poly_table(p: u64) -> Result<Vec<DigitPolys>> {
    (0..p).map(|w| digit_polys(p, w)).collect()
}

/// Checks `T_s ≡ prod_i h(z^(p^i); w_i)` and, for `p ∤ lambda`,
/// `I_{s,j} ≡ g_j(z; w_0) prod_{i>=1} h(z^(p^i); w_i)` modulo `p`, plus the
/// nonvanishing of `T_s` (and of `I_{s,j}` when `p ∤ lambda`) modulo `p`.
pub fn check_factorization(fam: &SolutionFamily, table: &[DigitPolys]) -> Result<Vec<CheckRecord>> {
    let (p, s, lambda) = (fam.p, fam.s, fam.lambda);
    let dv = digits(p, s, lambda)?;
    let params = [("p", p as i64), ("s", s as i64), ("lambda", lambda)];
    let pb = BigInt::from(p);

    let frob = |i: usize, poly: &PolyZ| poly.scale_exponents(to_u32(p.pow(i as u32)));
    let mut tail_product = PolyZ::one(&Z_VARS);
    for i in 1..s as usize {
        tail_product = &tail_product * &frob(i, &table[dv.digits[i] as usize].h);
    }
    let full = &table[dv.digits[0] as usize].h * &tail_product;

    let mut out = Vec::new();
    let diff = &fam.t - &full;
    out.push(CheckRecord::congruence(
        "factor_T",
        &params,
        1,
        ModulusExponent::from_valuation(diff.min_valuation(p)),
    ));
    out.push(CheckRecord::predicate(
        "nonvanishing_T_mod_p",
        &params,
        !fam.t.is_zero_mod(&pb),
    ));
    if lambda % p as i64 != 0 {
        for j in 0..2 {
            let rhs = &table[dv.digits[0] as usize].g[j] * &tail_product;
            let diff = &fam.i[j] - &rhs;
            out.push(CheckRecord::congruence(
                format!("factor_I{}", j + 1),
                &params,
                1,
                ModulusExponent::from_valuation(diff.min_valuation(p)),
            ));
            out.push(CheckRecord::predicate(
                format!("nonvanishing_I{}_mod_p", j + 1),
                &params,
                !fam.i[j].is_zero_mod(&pb),
            ));
        }
    }
    Ok(out)
}

pub fn verify_factorization_mod_p(p: u64, s: u32, lambda: i64) -> Result<Vec<CheckRecord>> {
    let fam = family_closed_form(p, s, lambda)?;
    check_factorization(&fam, &digit_poly_table(p)?)
}

/// Nonvanishing of `h(z; w)` (all `w`) and `g_j(z; w)` (`w >= 1`) modulo `p`,
/// both directly and through a Lucas-theorem witness coefficient.
pub fn check_digit_polys_nonvanishing(p: u64) -> Result<Vec<CheckRecord>> {
    let n = (p - 1) / 2;
    let pb = BigInt::from(p);
    let mut out = Vec::new();
    for dp in digit_poly_table(p)? {
        let w = dp.w;
        let params = [("p", p as i64), ("w", w as i64)];
        // witness z1^k z2^l with k + l = w, k, l <= n
        let k = w.min(n);
        let l = w - k;
        let lucas = lucas_binom_mod_p(n, k, p) * lucas_binom_mod_p(n, l, p) % p;
        let sign = if w % 2 == 1 { -1 } else { 1 };
        let expected = binom_exact(n, k) * binom_exact(n, l) * sign;
        let witness_ok = dp.h.coeff(&[to_u32(k), to_u32(l)]) == expected && lucas != 0;
        out.push(CheckRecord::predicate(
            "nonvanishing_h_mod_p",
            &params,
            witness_ok && !dp.h.is_zero_mod(&pb),
        ));
        if w >= 1 {
            for j in 0..2 {
                // g_1 uses (n - 1, n), g_2 uses (n, n - 1)
                let (n1, n2) = if j == 0 { (n - 1, n) } else { (n, n - 1) };
                let k = (w - 1).min(n1);
                let l = w - 1 - k;
                let lucas = lucas_binom_mod_p(n1, k, p) * lucas_binom_mod_p(n2, l, p) % p;
                let sign = if (w - 1) % 2 == 1 { -1 } else { 1 };
                let expected = binom_exact(n1, k) * binom_exact(n2, l) * sign;
                let ok = l <= n2
                    && dp.g[j].coeff(&[to_u32(k), to_u32(l)]) == expected
                    && lucas != 0
                    && !dp.g[j].is_zero_mod(&pb);
                out.push(CheckRecord::predicate(
                    format!("nonvanishing_g{}_mod_p", j + 1),
                    &params,
                    ok,
                ));
            }
        }
    }
    Ok(out)
}

/// Exponent `E = p^e + p^(e+1) + ... + p^(s-1)` in
/// `Phi_s(lambda) = Phi_e(lambda) * Phi_1(1)^E` for `lambda` in `Λ_e`, `s > e`.
pub fn product_identity_exponent(p: u64, e: u32, s: u32) -> u64 {
    (e..s).map(|i| p.pow(i)).sum()
}

/// Exact check of `Phi_s(lambda) = Phi_e(lambda) * Phi_1(1)^E`.
pub fn verify_product_identity(p: u64, e: u32, s: u32, lambda: i64) -> Result<bool> {
    check_lambda(p, e, lambda)?;
    if s <= e {
        return Err(Error::InvalidParameter(format!(
            "need s > e, got s={s}, e={e}"
        )));
    }
    let lhs = master_poly(p, s, lambda)?;
    let rhs = &master_poly(p, e, lambda)?
        * &master_poly(p, 1, 1)?.pow(product_identity_exponent(p, e, s));
    Ok(lhs == rhs)
}

/// The t-support of `Phi_s` is `[(p^s - lambda)/2, (p^s - lambda)/2 + p^s - 1]`, and
/// `k p^s - 1` lies in it only for `k = 1`.
pub fn newton_interval_check(p: u64, s: u32, lambda: i64) -> Result<bool> {
    let (a, _) = half_exponents(p, s, lambda)?;
    let ps = p_pow(p, s)?;
    let phi = master_poly(p, s, lambda)?;
    let lo = phi.low_degree_in(Var::T)?.map(u64::from);
    let hi = phi.degree_in(Var::T)?.map(u64::from);
    let expected = (a, a + ps - 1);
    if lo != Some(expected.0) || hi != Some(expected.1) {
        return Ok(false);
    }
    let hits: Vec<u64> = (1..=(expected.1 + 1) / ps + 1)
        .filter(|k| {
            let x = k * ps - 1;
            x >= expected.0 && x <= expected.1
        })
        .collect();
    Ok(hits == vec![1])
}
