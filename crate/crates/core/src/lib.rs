//! Langlands Eisenstein series for SL(n, Z) induced from cusp forms on the
//! blocks of a standard parabolic: parabolic bookkeeping, special functions,
//! Hecke eigenvalues, Whittaker functions, truncated lattice sums and
//! affine-symmetry decisions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod eisenstein;
pub mod error;
pub mod forms;
pub mod hecke;
pub mod par;
pub mod parabolic;
pub mod specfun;
pub mod uniqueness;
pub mod whittaker;

pub use error::{Error, Result};
pub use num_complex::Complex64;
