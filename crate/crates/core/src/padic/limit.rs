use std::sync::Arc;

use serde::Serialize;

use super::domain::{DomainFlags, DomainOracle};
use super::zpm::{PadicElem, Unramified};
use crate::algebra::binom_row_mod;
use crate::error::{Error, Result};
use crate::hypergeometric::{check_lambda, closed_form_sums, lambda_level, AntiDiagonalSum};

/// `T_s`, `I_s` and their first derivatives at a point, modulo `p^N`.
#[derive(Clone, Debug)]
pub struct FamilyValues {
    pub s: u32,
    pub lambda: i64,
    pub t: PadicElem,
    pub i: [PadicElem; 2],
    /// `dt[i] = dT/dz_i`.
    pub dt: [PadicElem; 2],
    /// `di[i][j] = dI_j/dz_i`.
    pub di: [[PadicElem; 2]; 2],
}

struct Powers {
    z: [Vec<PadicElem>; 2],
}

impl Powers {
    fn new(a: &[PadicElem; 2], degree: u64) -> Self {
        let z = [0, 1].map(|i| {
            let mut v = Vec::with_capacity(degree as usize + 1);
            v.push(a[i].ctx().from_int(1));
            for k in 0..degree as usize {
                v.push(&v[k] * &a[i]);
            }
            v
        });
        Powers { z }
    }

    fn get(&self, i: usize, k: u64) -> &PadicElem {
        &self.z[i][k as usize]
    }
}

/// Value and gradient of an anti-diagonal binomial sum at `a`.
fn eval_sum(
    ctx: &Arc<Unramified>,
    sum: &AntiDiagonalSum,
    pw: &Powers,
) -> (PadicElem, [PadicElem; 2]) {
    let (p, n) = (ctx.p(), ctx.precision());
    let r1 = binom_row_mod(sum.n1, p, n);
    let r2 = binom_row_mod(sum.n2, p, n);
    let mut val = ctx.zero();
    let mut grad = [ctx.zero(), ctx.zero()];
    let d = sum.degree;
    for k in sum.k_range() {
        let l = d - k;
        let m = ctx.modulus() as u128;
        let x = r1[k as usize].value_mod() as u128 * r2[l as usize].value_mod() as u128 % m;
        let coef = ctx.from_u64(x as u64);
        val = &val + &(&coef * &(pw.get(0, k) * pw.get(1, l)));
        if k > 0 {
            let term = &coef.scale(k as i64) * &(pw.get(0, k - 1) * pw.get(1, l));
            grad[0] = &grad[0] + &term;
        }
        if l > 0 {
            let term = &coef.scale(l as i64) * &(pw.get(0, k) * pw.get(1, l - 1));
            grad[1] = &grad[1] + &term;
        }
    }
    if sum.negative {
        val = -&val;
        grad = [-&grad[0], -&grad[1]];
    }
    (val, grad)
}

/// Evaluate the closed forms of `T_s`, `I_s` and their gradients at `a`, modulo `p^N`.
pub fn eval_family_at(s: u32, lambda: i64, a: &[PadicElem; 2]) -> Result<FamilyValues> {
    let ctx = a[0].ctx().clone();
    check_lambda(ctx.p(), s, lambda)?;
    let [ts, i1s, i2s] = closed_form_sums(ctx.p(), s, lambda)?;
    let pw = Powers::new(a, ts.degree);
    let (t, dt) = eval_sum(&ctx, &ts, &pw);
    let (i1, d1) = eval_sum(&ctx, &i1s, &pw);
    let (i2, d2) = eval_sum(&ctx, &i2s, &pw);
    Ok(FamilyValues {
        s,
        lambda,
        t,
        i: [i1, i2],
        dt,
        di: [
            [d1[0].clone(), d2[0].clone()],
            [d1[1].clone(), d2[1].clone()],
        ],
    })
}

/// `I_s(a)/T_s(a)` together with `dI_s/dz_i (a) / T_s(a)`.
#[derive(Clone, Debug)]
pub struct LevelRatios {
    pub s: u32,
    pub ratio: [PadicElem; 2],
    /// `derivative[i][j] = (dI_j/dz_i)(a) / T_s(a)`.
    pub derivative: [[PadicElem; 2]; 2],
    /// `(dT/dz_i)(a) / T_s(a)`.
    pub log_derivative: [PadicElem; 2],
}

fn unit_t(v: &FamilyValues) -> Result<PadicElem> {
    if !v.t.is_unit() {
        return Err(Error::OutsideDomain(format!(
            "T_{}(a;{}) is not a unit",
            v.s, v.lambda
        )));
    }
    v.t.inverse()
}

pub fn ratios_at_level(s: u32, lambda: i64, a: &[PadicElem; 2]) -> Result<LevelRatios> {
    let v = eval_family_at(s, lambda, a)?;
    let inv = unit_t(&v)?;
    Ok(LevelRatios {
        s,
        ratio: [&v.i[0] * &inv, &v.i[1] * &inv],
        derivative: [0, 1].map(|i| [0, 1].map(|j| &v.di[i][j] * &inv)),
        log_derivative: [&v.dt[0] * &inv, &v.dt[1] * &inv],
    })
}

/// `I_s(a; lambda+2) / T_s(a; lambda)`.
pub fn shifted_ratio_at_level(s: u32, lambda: i64, a: &[PadicElem; 2]) -> Result<[PadicElem; 2]> {
    let base = eval_family_at(s, lambda, a)?;
    let inv = unit_t(&base)?;
    let shifted = eval_family_at(s, lambda + 2, a)?;
    Ok([&shifted.i[0] * &inv, &shifted.i[1] * &inv])
}

/// The limit vector `I(a; lambda)` and its companions, modulo `p^N`.
#[derive(Clone, Debug, Serialize)]
pub struct LimitVector {
    pub p: u64,
    pub m: u32,
    pub lambda: i64,
    pub precision: u32,
    /// Source level used for the limit `I` and its derivative companions.
    pub level: u32,
    pub point: [PadicElem; 2],
    pub values: [PadicElem; 2],
    pub valuations: [u32; 2],
    /// `derivative[i][j]`: the limit of `(dI_j/dz_i)/T_s`.
    pub derivative: [[PadicElem; 2]; 2],
    /// The limit of `(dT/dz_i)/T_s`.
    pub log_derivative: [PadicElem; 2],
    /// The limit of `I_s(lambda+2)/T_s(lambda)` and its source level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifted: Option<[PadicElem; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifted_level: Option<u32>,
    pub flags: DomainFlags,
}

/// Source level `N + e` for the limit, `N + 2e` (with `e` covering `lambda + 2`) for the shifted limit.
pub fn limit_levels(p: u64, lambda: i64, precision: u32) -> (u32, u32) {
    let e = lambda_level(p, lambda);
    let e2 = e.max(lambda_level(p, lambda + 2));
    (precision + e, precision + 2 * e2)
}

pub fn limit_vector(
    oracle: &DomainOracle,
    lambda: i64,
    a: &[PadicElem; 2],
    with_shifted: bool,
) -> Result<LimitVector> {
    let ctx = a[0].ctx().clone();
    let (p, n) = (ctx.p(), ctx.precision());
    let flags = oracle.flags(&[a[0].residue(), a[1].residue()], lambda)?;
    if !flags.in_domain {
        return Err(Error::OutsideDomain(format!(
            "{} vanishes mod p at the point (lambda = {lambda})",
            flags
                .failing
                .clone()
                .unwrap_or_else(|| "H(z;lambda)".into())
        )));
    }
    let (level, shifted_level) = limit_levels(p, lambda, n);
    let r = ratios_at_level(level, lambda, a)?;
    let shifted = if with_shifted {
        Some(shifted_ratio_at_level(shifted_level, lambda, a)?)
    } else {
        None
    };
    Ok(LimitVector {
        p,
        m: ctx.m(),
        lambda,
        precision: n,
        level,
        point: a.clone(),
        valuations: [r.ratio[0].valuation(), r.ratio[1].valuation()],
        values: r.ratio,
        derivative: r.derivative,
        log_derivative: r.log_derivative,
        shifted_level: shifted.as_ref().map(|_| shifted_level),
        shifted,
        flags,
    })
}

/// Valuation of `I_s/T_s - I_{s-1}/T_{s-1}` at `a`, capped at the working precision.
pub fn consecutive_gap(s: u32, lambda: i64, a: &[PadicElem; 2]) -> Result<u32> {
    let hi = ratios_at_level(s, lambda, a)?;
    let lo = ratios_at_level(s - 1, lambda, a)?;
    Ok((0..2)
        .map(|j| (&hi.ratio[j] - &lo.ratio[j]).valuation())
        .min()
        .unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeometric::family_closed_form;
    use crate::padic::fq::Fq;
    use num_bigint::BigInt;

    fn point(ctx: &Arc<Unramified>, a: i64, b: i64) -> [PadicElem; 2] {
        [ctx.from_int(a), ctx.from_int(b)]
    }

    /// Evaluate an exact polynomial at an integer point, then reduce.
    fn eval_exact(f: &crate::algebra::PolyZ, a: i64, b: i64) -> BigInt {
        f.terms()
            .map(|(e, c)| c * BigInt::from(a).pow(e[0]) * BigInt::from(b).pow(e[1]))
            .sum()
    }

    #[test]
    fn evaluation_matches_exact_polynomials() {
        let ctx = Unramified::new(3, 1, 4).unwrap();
        for (s, lambda) in [(2u32, 1i64), (2, -3), (3, 5), (3, -1)] {
            let fam = family_closed_form(3, s, lambda).unwrap();
            for (a, b) in [(2, 7), (-4, 5), (0, 1)] {
                let v = eval_family_at(s, lambda, &point(&ctx, a, b)).unwrap();
                assert_eq!(v.t, ctx.from_bigint(&eval_exact(&fam.t, a, b)));
                for j in 0..2 {
                    assert_eq!(v.i[j], ctx.from_bigint(&eval_exact(&fam.i[j], a, b)));
                    let dt = fam
                        .t
                        .derivative([crate::algebra::Var::Z1, crate::algebra::Var::Z2][j])
                        .unwrap();
                    assert_eq!(v.dt[j], ctx.from_bigint(&eval_exact(&dt, a, b)));
                }
            }
        }
    }

    #[test]
    fn special_point_values_at_finite_level() {
        // At (0, 1) only the k = 0 and k = 1 terms of the closed forms survive:
        // T_s = (-1)^n, I_{s,1} = (-1)^(n-1) n, I_{s,2} = (-1)^(n-1), with n = (p^s - 1)/2.
        let ctx = Unramified::new(5, 1, 3).unwrap();
        for s in 1..=3u32 {
            let n = (5i64.pow(s) - 1) / 2;
            let sign = |k: i64| if k % 2 == 0 { 1 } else { -1 };
            let v = eval_family_at(s, 1, &point(&ctx, 0, 1)).unwrap();
            assert_eq!(v.t, ctx.from_int(sign(n)));
            assert_eq!(v.i[0], ctx.from_int(sign(n - 1) * n));
            assert_eq!(v.i[1], ctx.from_int(sign(n - 1)));
            let w = eval_family_at(s, 1, &point(&ctx, 1, 0)).unwrap();
            assert_eq!((&w.i[0], &w.i[1]), (&v.i[1], &v.i[0]));
        }
    }

    #[test]
    fn special_limits() {
        let ctx = Unramified::new(3, 1, 2).unwrap();
        let oracle = DomainOracle::new(&Fq::new(3, 1).unwrap()).unwrap();
        let half = ctx.from_ratio(1, 2).unwrap();
        let l = limit_vector(&oracle, 1, &point(&ctx, 0, 1), false).unwrap();
        assert_eq!(l.values, [half.clone(), ctx.from_int(-1)]);
        assert_eq!(
            (l.values[0].coeffs(), l.values[1].coeffs()),
            (&[5u64][..], &[8u64][..])
        );
        let l = limit_vector(&oracle, 1, &point(&ctx, 1, 0), false).unwrap();
        assert_eq!(l.values, [ctx.from_int(-1), half]);
        let l = limit_vector(&oracle, 1, &point(&ctx, 1, 1), false).unwrap();
        let minus_half = ctx.from_ratio(-1, 2).unwrap();
        assert_eq!(l.values, [minus_half.clone(), minus_half]);
        assert!(matches!(
            limit_vector(&oracle, 1, &point(&ctx, 1, 2), false),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn stability_between_levels() {
        let ctx = Unramified::new(3, 2, 3).unwrap();
        let f = ctx.residue_field().clone();
        let oracle = DomainOracle::new(&f).unwrap();
        let g = f.primitive_element();
        let a = [ctx.teichmuller(&g), ctx.teichmuller(&f.one())];
        let l = limit_vector(&oracle, -1, &a, false).unwrap();
        let next = ratios_at_level(l.level + 1, -1, &a).unwrap();
        assert_eq!(next.ratio, l.values);
    }
}
