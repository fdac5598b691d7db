//! Exact integer, modular and sparse-polynomial arithmetic.
//!
//! Everything here is exact: polynomial coefficients are arbitrary-precision
//! integers and congruences are decided by coefficientwise divisibility.

mod binom;
mod modular;
mod poly;

pub use binom::{binom_exact, binom_mod, binom_row_mod, lucas_binom_mod_p, ValuedResidue};
pub use modular::{
    is_odd_prime, is_prime, mod_inverse, mod_pow, p_adic_digits, pow_u64, valuation_i64,
    valuation_int, ModContext,
};
pub use poly::{Exponents, PolyZ, Var};
