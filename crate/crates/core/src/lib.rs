//! Scalar conservation laws on Riemannian manifolds with boundary: geometry,
//! BV traces, vanishing viscosity and monotone finite-volume solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bv_trace;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod numerics;
pub mod oracles;
pub mod problem;
pub mod scheme;
pub mod viscous;

mod par;

pub use error::{Error, Result};
