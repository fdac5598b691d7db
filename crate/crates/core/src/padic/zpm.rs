use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Serialize, Serializer};

use super::fq::{Fq, FqElem};
use crate::algebra::mod_inverse;
use crate::error::{Error, Result};

/// Residues must fit comfortably in a `u64` with `u128` products.
const MAX_MODULUS_BITS: u32 = 62;

/// `Z_p^(m) / p^N`, presented as `(Z/p^N)[x]/(F)` with `F` the integer lift of the
/// reduction polynomial of the residue field.
#[derive(Debug, PartialEq, Eq)]
pub struct Unramified {
    fq: Fq,
    precision: u32,
    modulus: u64,
}

impl Unramified {
    pub fn new(p: u64, m: u32, precision: u32) -> Result<Arc<Self>> {
        let fq = Fq::new(p, m)?;
        Self::over(fq, precision)
    }

    pub fn over(fq: Fq, precision: u32) -> Result<Arc<Self>> {
        let p = fq.p();
        if precision == 0 {
            return Err(Error::InvalidParameter("precision must be positive".into()));
        }
        let modulus = match p.checked_pow(precision) {
            Some(q) if q < (1u64 << MAX_MODULUS_BITS) => q,
            _ => return Err(Error::PrecisionTooLarge { p, precision }),
        };
        Ok(Arc::new(Unramified {
            fq,
            precision,
            modulus,
        }))
    }

    pub fn p(&self) -> u64 {
        self.fq.p()
    }

    pub fn m(&self) -> u32 {
        self.fq.m()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue_field(&self) -> &Fq {
        &self.fq
    }

    fn mul_mod(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.modulus as u128) as u64
    }

    pub fn zero(self: &Arc<Self>) -> PadicElem {
        PadicElem {
            ctx: self.clone(),
            coeffs: vec![0; self.m() as usize],
        }
    }

    pub fn from_int(self: &Arc<Self>, x: i64) -> PadicElem {
        let mut e = self.zero();
        e.coeffs[0] = (x as i128).rem_euclid(self.modulus as i128) as u64;
        e
    }

    pub fn from_u64(self: &Arc<Self>, x: u64) -> PadicElem {
        let mut e = self.zero();
        e.coeffs[0] = x % self.modulus;
        e
    }

    pub fn from_bigint(self: &Arc<Self>, x: &BigInt) -> PadicElem {
        let mut e = self.zero();
        e.coeffs[0] = x
            .mod_floor(&BigInt::from(self.modulus))
            .to_u64()
            .expect("reduced");
        e
    }

    /// `num / den` for `den` prime to `p`.
    pub fn from_ratio(self: &Arc<Self>, num: i64, den: i64) -> Result<PadicElem> {
        let d = (den as i128).rem_euclid(self.modulus as i128) as u64;
        let inv = mod_inverse(d, self.modulus).ok_or_else(|| {
            Error::InvalidParameter(format!("{den} is not a unit mod {}", self.p()))
        })?;
        let mut e = self.from_int(num);
        e.coeffs[0] = self.mul_mod(e.coeffs[0], inv);
        Ok(e)
    }

    /// The element with the given coefficients in the power basis, reduced mod `p^N`.
    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[i64]) -> PadicElem {
        let mut e = self.zero();
        for (i, c) in coeffs.iter().enumerate() {
            let c = (*c as i128).rem_euclid(self.modulus as i128) as u64;
            if i < e.coeffs.len() {
                e.coeffs[i] = (e.coeffs[i] + c) % self.modulus;
            } else {
                let mut x = self.zero();
                x.coeffs[0] = c;
                e = &e + &(&x * &self.x_pow(i as u64));
            }
        }
        e
    }

    fn x_pow(self: &Arc<Self>, k: u64) -> PadicElem {
        let mut x = self.zero();
        if self.m() == 1 {
            // the generator of F_p[x]/(x) is 0
            return if k == 0 { self.from_int(1) } else { x };
        }
        x.coeffs[1] = 1;
        x.pow(k)
    }

    /// Any lift of a residue, with lowest digits given by the residue coefficients.
    pub fn lift(self: &Arc<Self>, t: &FqElem) -> PadicElem {
        PadicElem {
            ctx: self.clone(),
            coeffs: t.coeffs().to_vec(),
        }
    }

    /// The Teichmüller lift of `t`: iterate `x -> x^(p^m)` from any lift until stable.
    pub fn teichmuller(self: &Arc<Self>, t: &FqElem) -> PadicElem {
        let q = self.fq.order();
        let mut x = self.lift(t);
        for _ in 0..=self.precision {
            let y = x.pow(q);
            if y == x {
                break;
            }
            x = y;
        }
        x
    }

    /// A uniformly random element of the unit polydisc around the Teichmüller lift of `t`.
    pub fn random_in_disc<R: Rng + ?Sized>(self: &Arc<Self>, t: &FqElem, rng: &mut R) -> PadicElem {
        let base = self.teichmuller(t);
        let mut noise = self.zero();
        let span = self.modulus / self.p();
        for c in noise.coeffs.iter_mut() {
            *c = rng.gen_range(0..span) * self.p();
        }
        &base + &noise
    }
}

/// An element of `Z_p^(m)` known modulo `p^N`.
#[derive(Clone, Debug)]
pub struct PadicElem {
    ctx: Arc<Unramified>,
    coeffs: Vec<u64>,
}

impl PartialEq for PadicElem {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && (Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx)
    }
}

impl Eq for PadicElem {}

impl PadicElem {
    pub fn ctx(&self) -> &Arc<Unramified> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Largest `v <= N` with every coefficient divisible by `p^v`.
    pub fn valuation(&self) -> u32 {
        let p = self.ctx.p();
        let n = self.ctx.precision;
        self.coeffs
            .iter()
            .map(|&c| {
                if c == 0 {
                    return n;
                }
                let mut c = c;
                let mut v = 0;
                while c % p == 0 {
                    c /= p;
                    v += 1;
                }
                v
            })
            .min()
            .unwrap_or(n)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    pub fn residue(&self) -> FqElem {
        let p = self.ctx.p() as i64;
        let c: Vec<i64> = self.coeffs.iter().map(|&c| (c % p as u64) as i64).collect();
        self.ctx.fq.from_coeffs(&c)
    }

    pub fn pow(&self, mut k: u64) -> PadicElem {
        let mut base = self.clone();
        let mut acc = self.ctx.from_int(1);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn scale(&self, k: i64) -> PadicElem {
        self * &self.ctx.from_int(k)
    }

    /// Inverse of a unit, by Newton iteration from the residue-field inverse.
    pub fn inverse(&self) -> Result<PadicElem> {
        let inv_bar = self
            .ctx
            .fq
            .inv(&self.residue())
            .ok_or_else(|| Error::PrecisionExhausted("division by a non-unit".into()))?;
        let two = self.ctx.from_int(2);
        let mut x = self.ctx.lift(&inv_bar);
        let mut correct = 1;
        while correct < self.ctx.precision {
            x = &x * &(&two - &(self * &x));
            correct *= 2;
        }
        Ok(x)
    }

    /// Residue digits mod `p^N`, as a string: a number when `m = 1`, else colon-separated.
    pub fn to_residue_string(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        parts.join(":")
    }
}

impl std::fmt::Display for PadicElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_residue_string())
    }
}

impl Serialize for PadicElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_residue_string())
    }
}

fn same_ring(a: &PadicElem, b: &PadicElem) {
    assert!(
        Arc::ptr_eq(&a.ctx, &b.ctx) || a.ctx == b.ctx,
        "p-adic operands from different rings"
    );
}

impl Add for &PadicElem {
    type Output = PadicElem;
    fn add(self, rhs: &PadicElem) -> PadicElem {
        same_ring(self, rhs);
        let m = self.ctx.modulus;
        PadicElem {
            ctx: self.ctx.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| (a + b) % m)
                .collect(),
        }
    }
}

impl Sub for &PadicElem {
    type Output = PadicElem;
    fn sub(self, rhs: &PadicElem) -> PadicElem {
        same_ring(self, rhs);
        let m = self.ctx.modulus;
        PadicElem {
            ctx: self.ctx.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| (a + m - b) % m)
                .collect(),
        }
    }
}

impl Neg for &PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        &self.ctx.zero() - self
    }
}

impl Mul for &PadicElem {
    type Output = PadicElem;
    fn mul(self, rhs: &PadicElem) -> PadicElem {
        same_ring(self, rhs);
        let ctx = &self.ctx;
        let n = ctx.modulus as u128;
        let m = self.coeffs.len();
        let mut prod = vec![0u128; 2 * m - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a as u128 * b as u128) % n;
            }
        }
        // reduce by the monic lift F = x^m + f_{m-1} x^{m-1} + ... + f_0
        let f = ctx.fq.modulus();
        for deg in (m..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for (i, &fi) in f.iter().take(m).enumerate() {
                let k = deg - m + i;
                prod[k] = (prod[k] + n - c * fi as u128 % n) % n;
            }
            prod[deg] = 0;
        }
        PadicElem {
            ctx: ctx.clone(),
            coeffs: prod[..m].iter().map(|&c| c as u64).collect(),
        }
    }
}
