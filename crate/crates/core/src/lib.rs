//! Exact computation of generalized Donaldson-Thomas invariants of the
//! local projective plane.
//!
//! The generating series `DT(r, l) = sum_D DT(r, l, D) (-q^{1/2r})^D` is
//! built by recursion on the rank. Rank one is an eta quotient; higher
//! ranks come from wall-crossing on the one-point blow-up between the
//! pulled-back hyperplane class and the fibre class, where each wall
//! contributes a lattice sum that is evaluated as an indefinite theta
//! series.
//!
//! Everything is exact: coefficients are big rationals and exponents are
//! rationals with a per-series denominator.

pub mod engine;
pub mod error;
pub mod geometry;
pub mod joyce;
pub mod linalg;
pub mod qseries;
pub mod theta;

pub use error::{Error, Result};
pub use qseries::{eta_pow, Coefficient, QExp, Series, SeriesRecord};

/// Arbitrary precision integer.
pub type Integer = num_bigint::BigInt;

/// Arbitrary precision rational.
pub type Rational = num_rational::BigRational;

/// The series type used throughout the engine.
pub type QSeries = Series<Rational>;
