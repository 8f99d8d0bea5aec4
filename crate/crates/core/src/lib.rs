//! Spectral solver and diagnostics for the stationary Choquard equation
//! `-eps^2 Delta u + V u = eps^-alpha (I_alpha * |u|^p) |u|^(p-2) u`.

// Guards like `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod model;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use grid::{make_grid, Field, GridSpec, RieszKernel};
