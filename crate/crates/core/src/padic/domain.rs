use serde::Serialize;

use super::fq::{Fq, FqElem};
use super::zpm::PadicElem;
use crate::error::Result;
use crate::hypergeometric::{
    digit_poly_table, digit_set, digits, lambda_level, DigitPolys, LambdaSpec,
};

/// Residue-level membership flags of a point `a` for a given `lambda`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DomainFlags {
    pub lambda: i64,
    /// `|H(a; lambda)|_p = 1`.
    pub in_domain: bool,
    /// Membership in the smaller domain where the limit vector is nonvanishing.
    pub in_star_domain: bool,
    /// `a1 a2` is a unit; certifies the condition `a1 a2 != 0`.
    pub unit_coordinates: bool,
    /// `a1 - a2` is a unit.
    pub unit_difference: bool,
    /// The first vanishing polynomial, when the point misses `in_domain` or `in_star_domain`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing: Option<String>,
}

impl DomainFlags {
    /// Unit coordinates and unit difference: every matrix entry is then unit-denominated.
    pub fn admissible(&self) -> bool {
        self.in_domain && self.unit_coordinates && self.unit_difference
    }
}

/// Digit polynomials of one prime, reduced once and reused over many points.
#[derive(Clone, Debug)]
pub struct DomainOracle {
    fq: Fq,
    table: Vec<DigitPolys>,
}

impl DomainOracle {
    pub fn new(fq: &Fq) -> Result<Self> {
        Ok(DomainOracle {
            fq: fq.clone(),
            table: digit_poly_table(fq.p())?,
        })
    }

    pub fn field(&self) -> &Fq {
        &self.fq
    }

    fn h_bar(&self, a: &[FqElem; 2], w: u64) -> FqElem {
        self.fq.eval(&self.table[w as usize].h, a)
    }

    /// `H(a; lambda)` in the residue field, or the name of a vanishing factor.
    fn big_h(&self, a: &[FqElem; 2], lambda: i64) -> Result<std::result::Result<FqElem, String>> {
        let mut acc = self.fq.one();
        for w in digit_set(self.fq.p(), lambda)? {
            let v = self.h_bar(a, w);
            if v.is_zero() {
                return Ok(Err(format!("h(z;{w})")));
            }
            acc = self.fq.mul(&acc, &v);
        }
        Ok(Ok(acc))
    }

    fn star_prime_to_p(&self, a: &[FqElem; 2], lambda: i64, h: &FqElem) -> Result<bool> {
        let p = self.fq.p();
        let w0 = digits(p, lambda_level(p, lambda), lambda)?.digit(0);
        Ok((0..2).any(|j| {
            let g = self.fq.eval(&self.table[w0 as usize].g[j], a);
            !self.fq.mul(&g, h).is_zero()
        }))
    }

    pub fn flags(&self, a: &[FqElem; 2], lambda: i64) -> Result<DomainFlags> {
        let spec = LambdaSpec::new(self.fq.p(), lambda)?;
        let p = spec.p;
        let unit_coordinates = !a[0].is_zero() && !a[1].is_zero();
        let unit_difference = a[0] != a[1];
        let mut failing = None;
        let h = self.big_h(a, lambda)?;
        let in_domain = h.is_ok();
        let in_star_domain = match &h {
            Err(name) => {
                failing = Some(name.clone());
                false
            }
            Ok(hv) if lambda.rem_euclid(p as i64) != 0 => {
                let ok = self.star_prime_to_p(a, lambda, hv)?;
                if !ok {
                    failing = Some(format!("G1(z;{lambda}) and G2(z;{lambda})"));
                }
                ok
            }
            Ok(_) => {
                // p | lambda: intersect with the star domain of lambda + 2 and a1 a2 != 0
                let shifted = self.big_h(a, lambda + 2)?;
                let ok = match &shifted {
                    Err(name) => {
                        failing = Some(name.clone());
                        false
                    }
                    Ok(hv) => {
                        let ok = self.star_prime_to_p(a, lambda + 2, hv)?;
                        if !ok {
                            failing =
                                Some(format!("G1(z;{}) and G2(z;{})", lambda + 2, lambda + 2));
                        }
                        ok
                    }
                };
                if ok && !unit_coordinates {
                    failing = Some("z1 z2".into());
                }
                ok && unit_coordinates
            }
        };
        Ok(DomainFlags {
            lambda,
            in_domain,
            in_star_domain,
            unit_coordinates,
            unit_difference,
            failing,
        })
    }
}

/// Membership of a residue point, decided entirely in the residue field.
pub fn domain_membership(fq: &Fq, a: &[FqElem; 2], lambda: i64) -> Result<DomainFlags> {
    DomainOracle::new(fq)?.flags(a, lambda)
}

/// A point of `(Z_p^(m))^2` with the flags of its residue.
#[derive(Clone, Debug)]
pub struct DomainPoint {
    pub a: [PadicElem; 2],
    pub flags: DomainFlags,
}

impl DomainPoint {
    pub fn new(oracle: &DomainOracle, a: [PadicElem; 2], lambda: i64) -> Result<Self> {
        let flags = oracle.flags(&[a[0].residue(), a[1].residue()], lambda)?;
        Ok(DomainPoint { a, flags })
    }
}
