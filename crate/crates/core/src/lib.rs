//! Exact arithmetic toolkit for weighted simultaneous and linear
//! approximation of pairs of reals built from two integer sequences.

pub mod bestapprox;
pub mod certified;
pub mod construction;
pub mod error;
pub mod exponents;
pub mod murseq;
pub mod rational;
pub mod theta;

pub use error::{Error, Result};
