//! Legendre–Galerkin spectral solver for Sturm–Liouville eigenproblems
//! `-y'' + q y = λ y` on `(-1, 1)` with `q(x) = f(x) + g(x)/(1+x)^γ`.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command line
//! live in the companion `slp-cli` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod assembly;
pub mod basis;
pub mod catalog;
pub mod correction;
pub mod eigensolve;
pub mod error;
pub mod expansion;
pub mod linalg;
pub mod math;
pub mod pipeline;
pub mod polyops;
pub mod validation;

pub use error::SlpError;
