//! Pointwise certification of the limit relations and of the invariance of the
//! line spanned by the limit vector under the dynamical and qKZ connections.
//!
//! The dynamical operator is `D_i = 2 z_i d/dz_i - H_i`. All checks run at
//! points with unit coordinates and unit difference, so the entries of `H_i`
//! and `lambda K` are computed with honest unit inverses.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::domain::{DomainFlags, DomainOracle};
use super::limit::{limit_vector, LimitVector};
use super::zpm::{PadicElem, Unramified};
use crate::algebra::valuation_i64;
use crate::error::{Error, Result};
use crate::report::{CheckRecord, ModulusExponent};

type Vec2 = [PadicElem; 2];
type Mat2 = [[PadicElem; 2]; 2];

fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [0, 1].map(|r| &(&m[r][0] * &v[0]) + &(&m[r][1] * &v[1]))
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [0, 1].map(|r| [0, 1].map(|c| &(&a[r][0] * &b[0][c]) + &(&a[r][1] * &b[1][c])))
}

fn det(u: &Vec2, v: &Vec2) -> PadicElem {
    &(&u[0] * &v[1]) - &(&u[1] * &v[0])
}

fn vsub(u: &Vec2, v: &Vec2) -> Vec2 {
    [&u[0] - &v[0], &u[1] - &v[1]]
}

fn vscale(c: &PadicElem, v: &Vec2) -> Vec2 {
    [c * &v[0], c * &v[1]]
}

fn vec_valuation(v: &Vec2) -> u32 {
    v[0].valuation().min(v[1].valuation())
}

/// `H_1`, `H_2`, `lambda K` and `lambda dK/dz_i` evaluated at one point.
pub struct PointMatrices {
    pub lambda: i64,
    pub h: [Mat2; 2],
    pub lambda_k: Mat2,
    pub lambda_dk: [Mat2; 2],
}

impl PointMatrices {
    pub fn new(lambda: i64, a: &Vec2) -> Result<Self> {
        let ctx = a[0].ctx().clone();
        let inv_diff = (&a[0] - &a[1]).inverse()?;
        let inv_a = [a[0].inverse()?, a[1].inverse()?];
        let c = |x: i64| ctx.from_int(x);
        let l1 = -lambda - 1;
        // z_1/(z_1 - z_2) and z_2/(z_2 - z_1)
        let w = [&a[0] * &inv_diff, -&(&a[1] * &inv_diff)];
        let constants = [[[l1, -1], [0, 0]], [[0, 0], [-1, l1]]];
        let mixing = [[-1, 1], [1, -1]];
        let h = [0, 1].map(|i| {
            [0, 1].map(|r| [0, 1].map(|col| &c(constants[i][r][col]) + &w[i].scale(mixing[r][col])))
        });
        let diag = [c(lambda + 1), c(1)];
        let lambda_k = [0, 1].map(|r| [0, 1].map(|col| &diag[usize::from(r != col)] * &inv_a[r]));
        let inv_sq = [&inv_a[0] * &inv_a[0], &inv_a[1] * &inv_a[1]];
        let lambda_dk = [0, 1].map(|i| {
            [0, 1].map(|r| {
                [0, 1].map(|col| {
                    if r == i {
                        -&(&diag[usize::from(r != col)] * &inv_sq[r])
                    } else {
                        ctx.zero()
                    }
                })
            })
        });
        Ok(PointMatrices {
            lambda,
            h,
            lambda_k,
            lambda_dk,
        })
    }
}

fn require(flags: &DomainFlags, star: bool) -> Result<()> {
    let ok = if star {
        flags.in_star_domain
    } else {
        flags.in_domain
    };
    if !ok {
        return Err(Error::OutsideDomain(format!(
            "{} vanishes mod p at the point (lambda = {})",
            flags
                .failing
                .clone()
                .unwrap_or_else(|| "H(z;lambda)".into()),
            flags.lambda
        )));
    }
    if !flags.unit_coordinates || !flags.unit_difference {
        return Err(Error::OutsideDomain(
            "the point needs unit coordinates and a unit difference".into(),
        ));
    }
    Ok(())
}

fn base_params(ctx: &Arc<Unramified>, lambda: i64) -> Vec<(&'static str, i64)> {
    vec![
        ("p", ctx.p() as i64),
        ("m", ctx.m() as i64),
        ("precision", ctx.precision() as i64),
        ("lambda", lambda),
    ]
}

fn residue_check(
    check: &str,
    params: &[(&str, i64)],
    precision: u32,
    residual_valuation: u32,
) -> CheckRecord {
    CheckRecord::congruence(
        check,
        params,
        precision,
        ModulusExponent::Finite(residual_valuation),
    )
}

/// `D_i I = 2 a_i dI/dz_i - H_i I`, with `dI/dz_i = I^(i) - I_i I / 2`.
fn dynamical_image(
    lv: &LimitVector,
    mats: &PointMatrices,
    i: usize,
    half: &PadicElem,
) -> (Vec2, Vec2) {
    let two_ai = lv.point[i].scale(2);
    let d_limit = vsub(
        &lv.derivative[i],
        &vscale(&(half * &lv.values[i]), &lv.values),
    );
    let h_i = mat_vec(&mats.h[i], &lv.values);
    (vsub(&vscale(&two_ai, &d_limit), &h_i), d_limit)
}

/// Relations between `I`, `I^(i)`, the shifted limit and `I(lambda + 2)` at one point.
pub fn verify_limit_relations(
    oracle: &DomainOracle,
    lambda: i64,
    a: &Vec2,
) -> Result<Vec<CheckRecord>> {
    let ctx = a[0].ctx().clone();
    let n = ctx.precision();
    let lv = limit_vector(oracle, lambda, a, true)?;
    require(&lv.flags, false)?;
    let mats = PointMatrices::new(lambda, a)?;
    let half = ctx.from_ratio(1, 2)?;
    let mut out = Vec::new();
    for i in 0..2 {
        let mut params = base_params(&ctx, lambda);
        params.push(("i", i as i64 + 1));
        let log_gap = &lv.log_derivative[i] - &(&half * &lv.values[i]);
        out.push(residue_check(
            "limit_log_derivative",
            &params,
            n,
            log_gap.valuation(),
        ));
        let h_i = mat_vec(&mats.h[i], &lv.values);
        let scaled = vsub(&vscale(&lv.point[i].scale(2), &lv.derivative[i]), &h_i);
        let unscaled = vsub(&lv.derivative[i], &h_i);
        out.push(
            residue_check(
                "limit_derivative_relation",
                &params,
                n,
                vec_valuation(&scaled),
            )
            .with_detail(format!(
                "I^(i) = H_i I/(2 z_i); the unscaled form I^(i) - H_i I has exponent {}",
                vec_valuation(&unscaled)
            )),
        );
    }
    let shifted = lv.shifted.as_ref().expect("requested");
    let v_lambda = valuation_i64(lambda, ctx.p()).unwrap_or(0);
    for j in 0..2 {
        let mut params = base_params(&ctx, lambda);
        params.push(("j", j as i64 + 1));
        let lhs = &(&a[j] * &shifted[j]).scale(lambda);
        let rhs = &lv.values[j].scale(lambda + 1) + &lv.values[1 - j];
        let mut rec = residue_check("limit_qkz_relation", &params, n, (lhs - &rhs).valuation());
        if v_lambda > 0 {
            rec = rec.with_detail(format!(
                "checked after clearing lambda; the uncleared relation holds mod p^{}",
                n.saturating_sub(v_lambda)
            ));
        }
        out.push(rec);
    }
    let up = oracle.flags(&[a[0].residue(), a[1].residue()], lambda + 2)?;
    if up.in_domain {
        let lv2 = limit_vector(oracle, lambda + 2, a, false)?;
        let d = det(shifted, &lv2.values);
        out.push(residue_check(
            "limit_proportionality",
            &base_params(&ctx, lambda),
            n,
            d.valuation(),
        ));
    }
    Ok(out)
}

/// Nonvanishing of `I`, parallelism of `D_i I` and of `tau I = K I` with the line, and
/// compatibility `tau D_i(lambda) = D_i(lambda + 2) tau` on the section `I`.
pub fn verify_bundle_invariance(
    oracle: &DomainOracle,
    lambda: i64,
    a: &Vec2,
) -> Result<Vec<CheckRecord>> {
    let ctx = a[0].ctx().clone();
    let (p, n) = (ctx.p(), ctx.precision());
    let up = oracle.flags(&[a[0].residue(), a[1].residue()], lambda + 2)?;
    let lv = limit_vector(oracle, lambda, a, false)?;
    require(&lv.flags, true)?;
    let mats = PointMatrices::new(lambda, a)?;
    let mats_up = PointMatrices::new(lambda + 2, a)?;
    let half = ctx.from_ratio(1, 2)?;
    let mut out = Vec::new();

    let min_v = lv.valuations[0].min(lv.valuations[1]);
    let needs_unit = lambda.rem_euclid(p as i64) != 0;
    let pass = if needs_unit { min_v == 0 } else { min_v < n };
    out.push(
        CheckRecord::predicate("bundle_nonvanishing", &base_params(&ctx, lambda), pass)
            .with_detail(format!("min valuation {min_v}")),
    );

    for (i, ai) in a.iter().enumerate() {
        let mut params = base_params(&ctx, lambda);
        params.push(("i", i as i64 + 1));
        let (image, d_limit) = dynamical_image(&lv, &mats, i, &half);
        let unscaled = vsub(&d_limit, &mat_vec(&mats.h[i], &lv.values));
        out.push(
            residue_check(
                "bundle_dynamical",
                &params,
                n,
                det(&image, &lv.values).valuation(),
            )
            .with_detail(format!(
                "with d/dz_i - H_i in place of 2 z_i d/dz_i - H_i the determinant has exponent {}",
                det(&unscaled, &lv.values).valuation()
            )),
        );

        // lambda (K D_i I) against lambda (2 a_i dK/dz_i I + K 2 a_i dI/dz_i - H_i(lambda+2) K I)
        let two_ai = ai.scale(2);
        let lhs = mat_vec(&mats.lambda_k, &image);
        let k_i = mat_vec(&mats.lambda_k, &lv.values);
        let rhs = vsub(
            &[
                &(&two_ai * &mat_vec(&mats.lambda_dk[i], &lv.values)[0])
                    + &(&two_ai * &mat_vec(&mats.lambda_k, &d_limit)[0]),
                &(&two_ai * &mat_vec(&mats.lambda_dk[i], &lv.values)[1])
                    + &(&two_ai * &mat_vec(&mats.lambda_k, &d_limit)[1]),
            ],
            &mat_vec(&mats_up.h[i], &k_i),
        );
        // the same identity for d/dz_i - H_i, as matrices: dK/dz_i + K H_i(lambda) - H_i(lambda+2) K
        let unscaled_residual = {
            let kh = mat_mul(&mats.lambda_k, &mats.h[i]);
            let hk = mat_mul(&mats_up.h[i], &mats.lambda_k);
            (0..2)
                .flat_map(|r| (0..2).map(move |c| (r, c)))
                .map(|(r, c)| (&(&mats.lambda_dk[i][r][c] + &kh[r][c]) - &hk[r][c]).valuation())
                .min()
                .unwrap()
        };
        out.push(
            residue_check(
                "bundle_compatibility",
                &params,
                n,
                vec_valuation(&vsub(&lhs, &rhs)),
            )
            .with_detail(format!(
                "with d/dz_i - H_i the matrix identity has exponent {unscaled_residual}"
            )),
        );
    }

    if up.in_star_domain {
        let lv2 = limit_vector(oracle, lambda + 2, a, false)?;
        let tau = mat_vec(&mats.lambda_k, &lv.values);
        let d = det(&tau, &lv2.values);
        let nonzero = lv2.valuations[0].min(lv2.valuations[1]) < n;
        let mut rec = residue_check("bundle_qkz", &base_params(&ctx, lambda), n, d.valuation());
        rec.pass &= nonzero;
        out.push(rec.with_detail(format!("I(lambda+2) nonzero: {nonzero}")));
    }
    Ok(out)
}

/// Residue pairs satisfying `keep`, in index order.
pub fn residue_points(
    oracle: &DomainOracle,
    keep: impl Fn(&[super::fq::FqElem; 2]) -> Result<bool>,
) -> Result<Vec<[super::fq::FqElem; 2]>> {
    let f = oracle.field();
    let elems: Vec<_> = f.elements().collect();
    let mut out = Vec::new();
    for a1 in &elems {
        for a2 in &elems {
            let pt = [a1.clone(), a2.clone()];
            if keep(&pt)? {
                out.push(pt);
            }
        }
    }
    Ok(out)
}

/// Up to `count` random points in the star domain of `lambda` with unit coordinates and
/// unit difference: distinct residues chosen by `rng`, each lifted to a random point of its disc.
pub fn sample_admissible<R: Rng + ?Sized>(
    ctx: &Arc<Unramified>,
    oracle: &DomainOracle,
    lambda: i64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec2>> {
    let mut pts = residue_points(oracle, |pt| {
        let fl = oracle.flags(pt, lambda)?;
        Ok(fl.in_star_domain && fl.unit_coordinates && fl.unit_difference)
    })?;
    pts.shuffle(rng);
    pts.truncate(count);
    Ok(pts
        .iter()
        .map(|pt| {
            [
                ctx.random_in_disc(&pt[0], rng),
                ctx.random_in_disc(&pt[1], rng),
            ]
        })
        .collect())
}
