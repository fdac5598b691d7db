//! Dynamical and qKZ connection matrices, and exact congruence verifiers for
//! the solutions `I_s` modulo `p^s` (dynamical) and `p^(s-e)` (qKZ).
//!
//! Every check clears denominators and tests divisibility of the integer
//! coefficients of the resulting polynomial.

use num_bigint::BigInt;

use crate::algebra::{valuation_i64, PolyZ, Var};
use crate::error::{Error, Result};
use crate::hypergeometric::{check_lambda, lambda_level, SolutionFamily, Z_VARS};
use crate::report::{CheckRecord, ModulusExponent};

/// `num / den` with polynomial numerator and denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalEntry {
    pub num: PolyZ,
    pub den: PolyZ,
}

pub type Matrix2 = [[RationalEntry; 2]; 2];

fn z(v: Var) -> PolyZ {
    PolyZ::var(&Z_VARS, v).expect("z variable")
}

fn c(x: i64) -> PolyZ {
    PolyZ::constant(&Z_VARS, x)
}

/// `H_1`, `H_2` over the common denominator `z1 - z2`, and `K` with row
/// denominators `lambda z_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionMatrices {
    pub lambda: i64,
    pub h: [Matrix2; 2],
    pub k: Matrix2,
}

impl ConnectionMatrices {
    pub fn new(lambda: i64) -> Self {
        let diff = &z(Var::Z1) - &z(Var::Z2);
        let l1 = -lambda - 1;
        // H_i = C_i + z_i/(z_i - z_o) M, with M = [[-1, 1], [1, -1]]
        let constants = [[[l1, -1], [0, 0]], [[0, 0], [-1, l1]]];
        let mixing = [[-1, 1], [1, -1]];
        // z_1/(z_1 - z_2) = z1/diff, z_2/(z_2 - z_1) = -z2/diff
        let weights = [z(Var::Z1), -&z(Var::Z2)];
        let h = [0, 1].map(|i| {
            [0, 1].map(|r| {
                [0, 1].map(|col| RationalEntry {
                    num: &(&c(constants[i][r][col]) * &diff)
                        + &weights[i].scale(&BigInt::from(mixing[r][col])),
                    den: diff.clone(),
                })
            })
        });
        let zs = [z(Var::Z1), z(Var::Z2)];
        let k = [0, 1].map(|r| {
            [0, 1].map(|col| RationalEntry {
                num: c(if r == col { lambda + 1 } else { 1 }),
                den: zs[r].scale(&BigInt::from(lambda)),
            })
        });
        ConnectionMatrices { lambda, h, k }
    }

    /// Numerator matrix of `H_i` over `z1 - z2`.
    pub fn h_numerators(&self, i: usize) -> [[&PolyZ; 2]; 2] {
        [0, 1].map(|r| [0, 1].map(|col| &self.h[i][r][col].num))
    }
}

fn swap_z(f: &PolyZ) -> PolyZ {
    PolyZ::from_terms(
        &Z_VARS,
        f.terms().map(|(e, c)| (vec![e[1], e[0]], c.clone())),
    )
    .expect("two variables")
}

/// `K` is invariant under `z1 <-> z2` together with swapping both indices.
pub fn k_swap_symmetric(m: &ConnectionMatrices) -> bool {
    (0..2).all(|r| {
        (0..2).all(|col| {
            let a = &m.k[r][col];
            let b = &m.k[1 - r][1 - col];
            swap_z(&a.num) == b.num && swap_z(&a.den) == b.den
        })
    })
}

/// `(z1 - z2)(2 z_j dI/dz_j - H_j I)` for `j` in `{1, 2}` (given as 0 or 1).
pub fn apply_dynamical(j: usize, fam: &SolutionFamily) -> [PolyZ; 2] {
    let m = ConnectionMatrices::new(fam.lambda);
    let var = [Var::Z1, Var::Z2][j];
    let diff = &z(Var::Z1) - &z(Var::Z2);
    let two_zj = z(var).scale(&BigInt::from(2));
    let num = m.h_numerators(j);
    [0, 1].map(|r| {
        let d = fam.i[r].derivative(var).expect("z variable");
        let lhs = &(&diff * &two_zj) * &d;
        let rhs = &(num[r][0] * &fam.i[0]) + &(num[r][1] * &fam.i[1]);
        &lhs - &rhs
    })
}

fn vector_valuation(v: &[PolyZ], p: u64) -> ModulusExponent {
    ModulusExponent::from_valuation(v.iter().filter_map(|x| x.min_valuation(p)).min())
}

/// `D_j(lambda) I_s ≡ 0 (mod p^s)` for `j = 1, 2`, with the observed exponent.
pub fn check_dynamical(fam: &SolutionFamily) -> Vec<CheckRecord> {
    (0..2)
        .map(|j| {
            let v = apply_dynamical(j, fam);
            CheckRecord::congruence(
                "dynamical",
                &[
                    ("p", fam.p as i64),
                    ("s", fam.s as i64),
                    ("lambda", fam.lambda),
                    ("j", j as i64 + 1),
                ],
                fam.s,
                vector_valuation(&v, fam.p),
            )
        })
        .collect()
}

pub fn verify_dynamical(p: u64, s: u32, lambda: i64) -> Result<Vec<CheckRecord>> {
    let fam =
        crate::hypergeometric::family(p, s, lambda, crate::hypergeometric::DEFAULT_DEGREE_BUDGET)?;
    Ok(check_dynamical(&fam))
}

/// `lambda z_j I_{s,j}(lambda+2) - (lambda+1) I_{s,j}(lambda) - I_{s,3-j}(lambda)`.
pub fn qkz_cleared_difference(j: usize, at: &SolutionFamily, shifted: &SolutionFamily) -> PolyZ {
    let var = [Var::Z1, Var::Z2][j];
    let lambda = at.lambda;
    let lhs = &z(var).scale(&BigInt::from(lambda)) * &shifted.i[j];
    let rhs = &at.i[j].scale(&BigInt::from(lambda + 1)) + &at.i[1 - j];
    &lhs - &rhs
}

fn check_pair(at: &SolutionFamily, shifted: &SolutionFamily) -> Result<()> {
    if at.p != shifted.p || at.s != shifted.s || shifted.lambda != at.lambda + 2 {
        return Err(Error::InvalidParameter(format!(
            "expected families at lambda and lambda+2 on one level, got ({}, {}, {}) and ({}, {}, {})",
            at.p, at.s, at.lambda, shifted.p, shifted.s, shifted.lambda
        )));
    }
    Ok(())
}

/// Denominator-cleared qKZ congruence modulo `p^s`.
pub fn check_qkz_cleared(
    at: &SolutionFamily,
    shifted: &SolutionFamily,
) -> Result<Vec<CheckRecord>> {
    check_pair(at, shifted)?;
    Ok((0..2)
        .map(|j| {
            let d = qkz_cleared_difference(j, at, shifted);
            CheckRecord::congruence(
                "qkz_cleared",
                &[
                    ("p", at.p as i64),
                    ("s", at.s as i64),
                    ("lambda", at.lambda),
                    ("j", j as i64 + 1),
                ],
                at.s,
                ModulusExponent::from_valuation(d.min_valuation(at.p)),
            )
        })
        .collect())
}

pub fn verify_qkz_cleared(p: u64, s: u32, lambda: i64) -> Result<Vec<CheckRecord>> {
    check_lambda(p, s, lambda)?;
    check_lambda(p, s, lambda + 2)?;
    let budget = crate::hypergeometric::DEFAULT_DEGREE_BUDGET;
    let at = crate::hypergeometric::family(p, s, lambda, budget)?;
    let shifted = crate::hypergeometric::family(p, s, lambda + 2, budget)?;
    check_qkz_cleared(&at, &shifted)
}

/// `I_s(z; lambda+2) ≡ K(z, lambda) I_s(z; lambda) (mod p^(s-e))` in the
/// rational-congruence sense.
///
/// Each component is cleared by `lambda z_j`. When `p | lambda` the right-hand
/// side has rational coefficients, so the observed exponent of the cleared
/// difference is lowered by `v_p(lambda)`.
pub fn check_qkz_rational_form(
    at: &SolutionFamily,
    shifted: &SolutionFamily,
    e: u32,
) -> Result<Vec<CheckRecord>> {
    check_pair(at, shifted)?;
    let (p, s, lambda) = (at.p, at.s, at.lambda);
    if s <= e || lambda_level(p, lambda) > e || lambda_level(p, lambda + 2) > e {
        return Err(Error::InvalidParameter(format!(
            "need s > e and lambda, lambda+2 in Λ_e (p={p}, s={s}, e={e}, lambda={lambda})"
        )));
    }
    let vl = valuation_i64(lambda, p).expect("odd lambda is nonzero");
    Ok((0..2)
        .map(|j| {
            let d = qkz_cleared_difference(j, at, shifted);
            let observed = ModulusExponent::from_valuation(d.min_valuation(p)).minus(vl);
            let rec = CheckRecord::congruence(
                "qkz_rational",
                &[
                    ("p", p as i64),
                    ("s", s as i64),
                    ("e", e as i64),
                    ("lambda", lambda),
                    ("j", j as i64 + 1),
                ],
                s - e,
                observed,
            );
            if vl > 0 {
                rec.with_detail(format!("denominator lambda carries p^{vl}"))
            } else {
                rec
            }
        })
        .collect())
}

pub fn verify_qkz_rational_form(p: u64, s: u32, e: u32, lambda: i64) -> Result<Vec<CheckRecord>> {
    let budget = crate::hypergeometric::DEFAULT_DEGREE_BUDGET;
    check_lambda(p, e, lambda)?;
    check_lambda(p, e, lambda + 2)?;
    let at = crate::hypergeometric::family(p, s, lambda, budget)?;
    let shifted = crate::hypergeometric::family(p, s, lambda + 2, budget)?;
    check_qkz_rational_form(&at, &shifted, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeometric::{family_direct, lambda_range};

    fn zpoly(terms: Vec<(Vec<u32>, i64)>) -> PolyZ {
        PolyZ::from_terms(&Z_VARS, terms).unwrap()
    }

    #[test]
    fn h_sum_is_constant_in_z() {
        for lambda in [-5, -1, 1, 3, 7] {
            let m = ConnectionMatrices::new(lambda);
            let diff = &z(Var::Z1) - &z(Var::Z2);
            for r in 0..2 {
                for col in 0..2 {
                    let sum = &m.h[0][r][col].num + &m.h[1][r][col].num;
                    let expected = if r == col {
                        diff.scale(&BigInt::from(-lambda - 2))
                    } else {
                        PolyZ::zero(&Z_VARS)
                    };
                    assert_eq!(sum, expected);
                }
            }
            assert!(k_swap_symmetric(&m));
        }
    }

    #[test]
    fn h1_numerators_match_hand_expansion() {
        let m = ConnectionMatrices::new(1);
        // (-2)(z1 - z2) - z1, z2, z1, -z1
        assert_eq!(
            m.h[0][0][0].num,
            zpoly(vec![(vec![1, 0], -3), (vec![0, 1], 2)])
        );
        assert_eq!(m.h[0][0][1].num, zpoly(vec![(vec![0, 1], 1)]));
        assert_eq!(m.h[0][1][0].num, zpoly(vec![(vec![1, 0], 1)]));
        assert_eq!(m.h[0][1][1].num, zpoly(vec![(vec![1, 0], -1)]));
    }

    #[test]
    fn dynamical_small_cases() {
        // I = (1, 1) at (3, 1, 1): entry 1 is 3(z1 - z2), entry 2 vanishes
        let fam = family_direct(3, 1, 1).unwrap();
        let v = apply_dynamical(0, &fam);
        assert_eq!(v[0], zpoly(vec![(vec![1, 0], 3), (vec![0, 1], -3)]));
        assert!(v[1].is_zero());
        assert!(check_dynamical(&fam).iter().all(|r| r.pass));
        let fam = family_direct(3, 1, -1).unwrap();
        let v = apply_dynamical(1, &fam);
        assert!(v.iter().all(|x| x.is_zero_mod(&BigInt::from(3))));
        for l in lambda_range(5, 2).unwrap() {
            assert!(verify_dynamical(5, 2, l).unwrap().iter().all(|r| r.pass));
        }
        for l in [-47, -1, 1, 3, 21, 47] {
            assert!(verify_dynamical(7, 2, l).unwrap().iter().all(|r| r.pass));
        }
    }

    #[test]
    fn qkz_cleared_small_cases() {
        let at = family_direct(3, 1, -1).unwrap();
        let sh = family_direct(3, 1, 1).unwrap();
        // -z1 * 1 = 0 * (-z2) + (-z1), exactly
        assert!(qkz_cleared_difference(0, &at, &sh).is_zero());
        assert!(verify_qkz_cleared(3, 2, -1).unwrap().iter().all(|r| r.pass));
        for (p, s) in [(3u64, 2u32), (5, 2), (7, 2), (3, 3)] {
            assert!(verify_qkz_cleared(p, s, 1).unwrap().iter().all(|r| r.pass));
        }
    }

    #[test]
    fn qkz_rational_form_examples() {
        assert!(verify_qkz_rational_form(3, 2, 1, -1)
            .unwrap()
            .iter()
            .all(|r| r.pass));
        let recs = verify_qkz_rational_form(5, 3, 1, 1).unwrap();
        assert!(recs.iter().all(|r| r.pass && r.guaranteed == Some(2)));
        // lambda = 3 is divisible by 3: rational coefficients
        assert!(verify_qkz_rational_form(3, 3, 2, 3)
            .unwrap()
            .iter()
            .all(|r| r.pass));
        assert!(verify_qkz_rational_form(3, 2, 2, 1).is_err());
    }

    #[test]
    fn perturbation_is_detected() {
        let at = family_direct(3, 2, -1).unwrap().perturbed();
        let sh = family_direct(3, 2, 1).unwrap();
        assert!(!check_qkz_rational_form(&at, &sh, 1)
            .unwrap()
            .iter()
            .all(|r| r.pass));
        assert!(!check_dynamical(&at).iter().all(|r| r.pass));
    }
}
