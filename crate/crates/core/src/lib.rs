//! Exact generation and numerical verification of the large-time asymptotic
//! expansion for solutions of `h^3 (h'' + h') = 1`.
//!
//! * [`exact`]: rationals, truncated power series, polynomials in `(c, z)`.
//! * [`recursions`]: the coefficient sequences and polynomial families.
//! * [`numerics`]: double-double ODE integration, quadrature, inversion.
//! * [`asympt`]: evaluation of the expansion and the verification studies.

// Negated comparisons are deliberate: NaN must fail every range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod dd;
pub mod error;
pub mod exact;
pub mod numerics;
pub mod recursions;

pub use dd::Dd;
pub use error::{Error, Result};
