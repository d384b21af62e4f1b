//! Spectral boundary-integral simulator for the two-dimensional Peskin
//! problem with a general elasticity law.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod initdata;
pub mod integrator;
pub mod kernels;
pub mod linear;
pub mod nonlin;
pub mod norms;
pub mod output;
pub mod spectral;
pub mod tension;

pub use error::{PeskinError, Result};
