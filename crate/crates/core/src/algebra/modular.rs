use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A prime `p >= 3` together with an exponent `s`; reduction happens modulo `p^s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModContext {
    p: u64,
    s: u32,
    modulus: BigInt,
}

impl ModContext {
    pub fn new(p: u64, s: u32) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if s == 0 {
            return Err(Error::ZeroExponent);
        }
        let modulus = num_traits::pow(BigInt::from(p), s as usize);
        Ok(ModContext { p, s, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    /// Canonical representative in `[0, p^s)`.
    pub fn reduce(&self, c: &BigInt) -> BigInt {
        c.mod_floor(&self.modulus)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn is_odd_prime(n: u64) -> bool {
    n >= 3 && is_prime(n)
}

/// `base^exp`, or `None` on overflow.
pub fn pow_u64(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `modulus`, if `gcd(a, modulus) = 1`.
pub fn mod_inverse(a: u64, modulus: u64) -> Option<u64> {
    let eg = (a as i128).extended_gcd(&(modulus as i128));
    if eg.gcd != 1 {
        return None;
    }
    Some(eg.x.rem_euclid(modulus as i128) as u64)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation_int(c: &BigInt, p: u64) -> Option<u32> {
    if c.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = c.abs();
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
        if x.is_one() {
            return Some(v);
        }
    }
}

pub fn valuation_i64(c: i64, p: u64) -> Option<u32> {
    if c == 0 {
        return None;
    }
    let mut x = c.unsigned_abs();
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// Base-`p` digits of `n`, least significant first, padded to `len`.
pub fn p_adic_digits(mut n: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    while n > 0 || out.len() < len {
        out.push(n % p);
        n /= p;
    }
    out
}
