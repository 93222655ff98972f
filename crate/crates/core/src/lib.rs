//! Exact vortical self-similar flows of the two-dimensional isentropic
//! compressible Euler equations, the scale (Emden) dynamics that drive them,
//! their long-time classification, and numerical verification tooling.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod emden;
pub mod error;
pub mod fv;
pub mod numerics;
pub mod ode;
pub mod presets;
pub mod regimes;
pub mod residual;
pub mod solution;

pub use error::{Error, ParamViolation, Result};
pub use solution::{FlowSample, QueryPoint, ScaleState, SolutionParams};
