//! Exact construction and verification of the p^s-hypergeometric solutions of
//! the dynamical differential equations and the qKZ difference equation at
//! parameters (1/2, 1/2), together with their p-adic limits.

pub mod algebra;
pub mod connections;
pub mod dwork;
pub mod error;
pub mod grid;
pub mod hypergeometric;
pub mod padic;
pub mod report;

pub use error::{Error, Result};
