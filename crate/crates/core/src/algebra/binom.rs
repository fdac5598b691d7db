use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::modular::{mod_inverse, p_adic_digits};

/// A p-adic integer `p^valuation * unit`, with `unit` known modulo `p^precision`.
///
/// The represented value is therefore known modulo `p^(precision + valuation)`.
/// `unit` is invertible mod `p` unless the value is flagged exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ValuedResidue {
    pub p: u64,
    pub precision: u32,
    pub valuation: u32,
    pub unit: u64,
    pub exact_zero: bool,
}

impl ValuedResidue {
    pub fn zero(p: u64, precision: u32) -> Self {
        ValuedResidue {
            p,
            precision,
            valuation: 0,
            unit: 0,
            exact_zero: true,
        }
    }

    fn modulus(&self) -> u64 {
        self.p.pow(self.precision)
    }

    /// The value reduced modulo `p^precision`.
    pub fn value_mod(&self) -> u64 {
        if self.exact_zero || self.valuation >= self.precision {
            return 0;
        }
        let m = self.modulus();
        (self.p.pow(self.valuation) as u128 * self.unit as u128 % m as u128) as u64
    }

    /// Whether this agrees with the exact integer `x` modulo `p^(precision + valuation)`.
    pub fn agrees_with(&self, x: &BigInt) -> bool {
        if self.exact_zero {
            return x.is_zero();
        }
        let full = BigInt::from(self.p).pow(self.precision + self.valuation);
        let pv = BigInt::from(self.p).pow(self.valuation);
        let lhs = (pv * BigInt::from(self.unit) - x) % full;
        lhs.is_zero()
    }
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binom_exact(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn strip(mut x: u64, p: u64) -> (u32, u64) {
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    (v, x)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

/// `binom(n, k)` as a valued residue, tracking the p-adic valuation of the
/// factorial quotient so no exact big integer is formed.
pub fn binom_mod(n: u64, k: u64, p: u64, precision: u32) -> ValuedResidue {
    if k > n {
        return ValuedResidue::zero(p, precision);
    }
    let m = p.pow(precision);
    let mut num = 1 % m;
    let mut den = 1 % m;
    let mut v: i64 = 0;
    for i in 0..k {
        let (a, ua) = strip(n - i, p);
        let (b, ub) = strip(i + 1, p);
        v += a as i64 - b as i64;
        num = mul_mod(num, ua % m, m);
        den = mul_mod(den, ub % m, m);
    }
    let unit = mul_mod(num, mod_inverse(den, m).expect("unit denominator"), m);
    ValuedResidue {
        p,
        precision,
        valuation: v as u32,
        unit,
        exact_zero: false,
    }
}

/// The full row `binom(n, 0), ..., binom(n, n)` as valued residues.
pub fn binom_row_mod(n: u64, p: u64, precision: u32) -> Vec<ValuedResidue> {
    let m = p.pow(precision);
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut num = 1 % m;
    let mut den = 1 % m;
    let mut v: i64 = 0;
    row.push(ValuedResidue {
        p,
        precision,
        valuation: 0,
        unit: 1 % m,
        exact_zero: false,
    });
    for i in 0..n {
        let (a, ua) = strip(n - i, p);
        let (b, ub) = strip(i + 1, p);
        v += a as i64 - b as i64;
        num = mul_mod(num, ua % m, m);
        den = mul_mod(den, ub % m, m);
        let unit = mul_mod(num, mod_inverse(den, m).expect("unit denominator"), m);
        row.push(ValuedResidue {
            p,
            precision,
            valuation: v as u32,
            unit,
            exact_zero: false,
        });
    }
    row
}

/// `binom(n, k) mod p` by Lucas' theorem: the product of digitwise binomials.
pub fn lucas_binom_mod_p(n: u64, k: u64, p: u64) -> u64 {
    if k > n {
        return 0;
    }
    let nd = p_adic_digits(n, p, 0);
    let kd = p_adic_digits(k, p, nd.len());
    let mut acc = 1u64;
    for (a, b) in nd.iter().zip(kd.iter()) {
        let c = binom_exact(*a, *b) % p;
        acc = acc * c.to_u64().expect("small") % p;
        if acc == 0 {
            break;
        }
    }
    acc
}
