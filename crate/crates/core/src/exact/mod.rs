//! Exact algebra: rationals, truncated power series and bivariate polynomials.

mod poly;
mod rational;
mod series;

pub use poly::{BivariatePoly, NumericPoly};
pub use rational::Rational;
pub use series::{PowerTable, Ring, Series, TruncatedSeries};
