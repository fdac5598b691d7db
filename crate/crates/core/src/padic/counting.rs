use num_bigint::BigInt;
use serde::Serialize;

use super::fq::Fq;
use crate::algebra::PolyZ;
use crate::error::Result;
use crate::hypergeometric::{digit_poly_table, Z_VARS};

/// Exhaustive count of the nonvanishing locus of a polynomial over `(F_{p^m})^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub p: u64,
    pub m: u32,
    /// Total degree of the reduction mod `p`.
    pub degree: u32,
    pub count: u64,
    /// `(p^m + 1)(p^m - 1 - d) + 1`, when the hypotheses `B mod p != 0` and `d + 1 < p^m` hold.
    pub bound: Option<u64>,
    pub pass: bool,
}

pub fn lower_bound(q: u64, degree: u32) -> Option<u64> {
    let d = degree as u64;
    if d + 1 >= q {
        return None;
    }
    Some((q + 1) * (q - 1 - d) + 1)
}

pub fn count_nonvanishing(fq: &Fq, b: &PolyZ) -> Result<CountReport> {
    let reduced = b.reduce_mod(&BigInt::from(fq.p()));
    let degree = reduced.total_degree().unwrap_or(0);
    let q = fq.order();
    let elems: Vec<_> = fq.elements().collect();
    let mut count = 0;
    if !reduced.is_zero() {
        for a1 in &elems {
            for a2 in &elems {
                if !fq.eval(&reduced, &[a1.clone(), a2.clone()]).is_zero() {
                    count += 1;
                }
            }
        }
    }
    let bound = if reduced.is_zero() {
        None
    } else {
        lower_bound(q, degree)
    };
    Ok(CountReport {
        p: fq.p(),
        m: fq.m(),
        degree,
        count,
        pass: bound.is_some_and(|b| count >= b),
        bound,
    })
}

/// `z1 z2 h(z;0) prod_{w=1}^{p-1} h(z;w) g1(z;w) g2(z;w)`, whose unit locus lies in every star domain.
pub fn intersection_product(p: u64) -> Result<PolyZ> {
    let table = digit_poly_table(p)?;
    let z1z2 = PolyZ::from_terms(&Z_VARS, [(vec![1, 1], 1)])?;
    let mut acc = &z1z2 * &table[0].h;
    for d in &table[1..] {
        acc = &acc * &d.h;
        acc = &acc * &d.g[0];
        acc = &acc * &d.g[1];
    }
    Ok(acc)
}

/// The degree predicted for [`intersection_product`]: `(3p^2 - 7p + 8)/2`.
pub fn intersection_degree(p: u64) -> u64 {
    (3 * p * p - 7 * p + 8) / 2
}
