//! Numerical toolkit for the Kobayashi geometry of a family of smoothly
//! bounded pseudoconvex domains in C^2 whose Levi form degenerates along the
//! first coordinate axis.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// Negated comparisons reject NaN inputs along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod discs;
pub mod domain;
pub mod error;
pub mod fourier;
pub mod kobayashi;
pub mod linalg;
pub mod rhfactor;
pub mod solver;
pub mod stationary;

pub use error::{Error, Result};
pub use num_complex::Complex64;
