//! Positive maps on 3x3 matrices, the entanglement witnesses they induce, and
//! two families of PPT entangled 3x3 states they detect.
//!
//! - [`mat`]: dense complex matrices, Jacobi eigensolver, Cholesky, partial transpose.
//! - [`maps`]: the Choi, Osaka and generalized maps as superoperators, and their witnesses.
//! - [`biquad`]: bi-quadratic forms, their correspondence with maps, multi-start minimization.
//! - [`states`]: the `rho(x, t)` and `rho(y)` families and white-noise mixing.
//! - [`search`]: randomized search for PT-invariant states told apart by two witnesses.
//! - [`analysis`]: eigenvalue sweeps, threshold bisection, robustness.

// comparisons are written as `!(a < b)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod biquad;
pub mod error;
pub mod maps;
pub mod mat;
pub mod search;
pub mod states;

pub use error::{Error, Result};
