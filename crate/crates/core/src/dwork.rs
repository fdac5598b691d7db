//! Dwork-type congruences between consecutive levels `s - 1` and `s`.
//!
//! A ratio congruence `F1/F2 ≡ G1/G2 (mod p^k)` with `F2`, `G2` nonzero mod `p`
//! is checked as `F1 G2 - G1 F2 ≡ 0 (mod p^k)`. Polynomials are never inverted.

use num_bigint::BigInt;

use crate::algebra::{PolyZ, Var};
use crate::error::{Error, Result};
use crate::hypergeometric::{check_lambda, family, SolutionFamily, DEFAULT_DEGREE_BUDGET};
use crate::report::{CheckRecord, ModulusExponent};

const ZS: [Var; 2] = [Var::Z1, Var::Z2];

/// `F1/F2 ≡ G1/G2 (mod p^k)`, by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RatioCongruence<'a> {
    pub f1: PolyZ,
    pub f2: &'a PolyZ,
    pub g1: PolyZ,
    pub g2: &'a PolyZ,
    pub exponent: u32,
}

impl RatioCongruence<'_> {
    /// The record for this congruence, failing outright if a denominator vanishes mod `p`.
    pub fn check(&self, check: &str, p: u64, params: &[(&str, i64)]) -> CheckRecord {
        let pb = BigInt::from(p);
        if self.f2.is_zero_mod(&pb) || self.g2.is_zero_mod(&pb) {
            let mut rec =
                CheckRecord::congruence(check, params, self.exponent, ModulusExponent::Finite(0));
            rec.pass = false;
            return rec.with_detail("denominator vanishes modulo p");
        }
        let diff = &(&self.f1 * self.g2) - &(&self.g1 * self.f2);
        CheckRecord::congruence(
            check,
            params,
            self.exponent,
            ModulusExponent::from_valuation(diff.min_valuation(p)),
        )
    }
}

fn consecutive(upper: &SolutionFamily, lower: &SolutionFamily) -> Result<()> {
    if upper.p != lower.p || upper.lambda != lower.lambda || upper.s != lower.s + 1 {
        return Err(Error::InvalidParameter(
            "expected families at levels s and s-1 with equal (p, lambda)".into(),
        ));
    }
    Ok(())
}

fn levels(upper: &SolutionFamily, lower: &SolutionFamily, e: u32) -> Result<()> {
    consecutive(upper, lower)?;
    if upper.s <= e {
        return Err(Error::InvalidParameter(format!(
            "need s > e, got s={}, e={e}",
            upper.s
        )));
    }
    check_lambda(upper.p, e, upper.lambda)
}

fn base_params(f: &SolutionFamily, e: u32) -> Vec<(&'static str, i64)> {
    vec![
        ("p", f.p as i64),
        ("s", f.s as i64),
        ("e", e as i64),
        ("lambda", f.lambda),
    ]
}

fn d(f: &PolyZ, i: usize) -> PolyZ {
    f.derivative(ZS[i]).expect("z variable")
}

/// `D_j T_s / T_s ≡ D_j T_{s-1} / T_{s-1} (mod p^(s-e))`.
pub fn check_dwork_first(
    upper: &SolutionFamily,
    lower: &SolutionFamily,
    e: u32,
    j: usize,
) -> Result<CheckRecord> {
    levels(upper, lower, e)?;
    let mut params = base_params(upper, e);
    params.push(("j", j as i64 + 1));
    Ok(RatioCongruence {
        f1: d(&upper.t, j),
        f2: &upper.t,
        g1: d(&lower.t, j),
        g2: &lower.t,
        exponent: upper.s - e,
    }
    .check("dwork_first", upper.p, &params))
}

/// `D_i D_j T_s / T_s ≡ D_i D_j T_{s-1} / T_{s-1} (mod p^(s-e))`.
pub fn check_dwork_second(
    upper: &SolutionFamily,
    lower: &SolutionFamily,
    e: u32,
    i: usize,
    j: usize,
) -> Result<CheckRecord> {
    levels(upper, lower, e)?;
    let mut params = base_params(upper, e);
    params.push(("i", i as i64 + 1));
    params.push(("j", j as i64 + 1));
    Ok(RatioCongruence {
        f1: d(&d(&upper.t, j), i),
        f2: &upper.t,
        g1: d(&d(&lower.t, j), i),
        g2: &lower.t,
        exponent: upper.s - e,
    }
    .check("dwork_second", upper.p, &params))
}

/// `I_{s,j}/T_s ≡ I_{s-1,j}/T_{s-1}` and `D_i I_{s,j}/T_s ≡ D_i I_{s-1,j}/T_{s-1}`,
/// both modulo `p^(s-e)`.
pub fn check_dwork_vector(
    upper: &SolutionFamily,
    lower: &SolutionFamily,
    e: u32,
    j: usize,
) -> Result<Vec<CheckRecord>> {
    levels(upper, lower, e)?;
    let mut out = Vec::with_capacity(3);
    let mut params = base_params(upper, e);
    params.push(("j", j as i64 + 1));
    out.push(
        RatioCongruence {
            f1: upper.i[j].clone(),
            f2: &upper.t,
            g1: lower.i[j].clone(),
            g2: &lower.t,
            exponent: upper.s - e,
        }
        .check("dwork_vector", upper.p, &params),
    );
    for i in 0..2 {
        let mut params = params.clone();
        params.push(("i", i as i64 + 1));
        out.push(
            RatioCongruence {
                f1: d(&upper.i[j], i),
                f2: &upper.t,
                g1: d(&lower.i[j], i),
                g2: &lower.t,
                exponent: upper.s - e,
            }
            .check("dwork_vector_derivative", upper.p, &params),
        );
    }
    Ok(out)
}

/// `I_s(lambda+2)/T_s(lambda) ≡ I_{s-1}(lambda+2)/T_{s-1}(lambda) (mod p^(s-2e))`.
///
/// The guarantee needs `lambda + 2` in `Λ_e` as well. When only `lambda` is, the
/// check still runs against `s - 2e` and the record carries a note saying so.
pub fn check_dwork_shifted(
    upper: &SolutionFamily,
    lower: &SolutionFamily,
    upper_shifted: &SolutionFamily,
    lower_shifted: &SolutionFamily,
    e: u32,
) -> Result<Vec<CheckRecord>> {
    levels(upper, lower, e)?;
    consecutive(upper_shifted, lower_shifted)?;
    if upper_shifted.lambda != upper.lambda + 2 || upper_shifted.s != upper.s {
        return Err(Error::InvalidParameter(
            "shifted families must be at lambda + 2".into(),
        ));
    }
    if upper.s <= 2 * e {
        return Err(Error::InvalidParameter(format!(
            "need s > 2e, got s={}, e={e}",
            upper.s
        )));
    }
    let extrapolated = check_lambda(upper.p, e, upper_shifted.lambda).is_err();
    Ok((0..2)
        .map(|j| {
            let mut params = base_params(upper, e);
            params.push(("j", j as i64 + 1));
            let rec = RatioCongruence {
                f1: upper_shifted.i[j].clone(),
                f2: &upper.t,
                g1: lower_shifted.i[j].clone(),
                g2: &lower.t,
                exponent: upper.s - 2 * e,
            }
            .check("dwork_shifted", upper.p, &params);
            if extrapolated && rec.detail.is_none() {
                rec.with_detail("lambda+2 lies outside Lambda_e")
            } else {
                rec
            }
        })
        .collect())
}

fn pair(p: u64, s: u32, lambda: i64) -> Result<(SolutionFamily, SolutionFamily)> {
    if s < 2 {
        return Err(Error::InvalidParameter("need s >= 2".into()));
    }
    Ok((
        family(p, s, lambda, DEFAULT_DEGREE_BUDGET)?,
        family(p, s - 1, lambda, DEFAULT_DEGREE_BUDGET)?,
    ))
}

pub fn verify_dwork_first(p: u64, e: u32, lambda: i64, s: u32, j: usize) -> Result<CheckRecord> {
    check_lambda(p, e, lambda)?;
    let (u, l) = pair(p, s, lambda)?;
    check_dwork_first(&u, &l, e, j)
}

pub fn verify_dwork_second(
    p: u64,
    e: u32,
    lambda: i64,
    s: u32,
    i: usize,
    j: usize,
) -> Result<CheckRecord> {
    check_lambda(p, e, lambda)?;
    let (u, l) = pair(p, s, lambda)?;
    check_dwork_second(&u, &l, e, i, j)
}

pub fn verify_dwork_vector(
    p: u64,
    e: u32,
    lambda: i64,
    s: u32,
    j: usize,
) -> Result<Vec<CheckRecord>> {
    check_lambda(p, e, lambda)?;
    let (u, l) = pair(p, s, lambda)?;
    check_dwork_vector(&u, &l, e, j)
}

pub fn verify_dwork_shifted(p: u64, e: u32, lambda: i64, s: u32) -> Result<Vec<CheckRecord>> {
    check_lambda(p, e, lambda)?;
    check_lambda(p, s.saturating_sub(1), lambda + 2)?;
    let (u, l) = pair(p, s, lambda)?;
    let (us, ls) = pair(p, s, lambda + 2)?;
    check_dwork_shifted(&u, &l, &us, &ls, e)
}
