//! Exact linear differential operators with rational coefficients.
//!
//! Operator transforms in the Weyl algebra, Newton-Ramis polygons, local
//! solution data at 0 and infinity, the formal Laplace calculus of
//! `x^a (ln x)^k`, and p-adic coefficient growth analysis, combined into a
//! screening classifier for E-operators.

pub mod classify;
pub mod cli;
pub mod error;
pub mod exact;
pub mod exec;
pub mod laplace;
pub mod local;
pub mod padic;
pub mod polygon;
pub mod weyl;

pub use error::{Error, Result};
pub use exact::{int, rat, LaurentSeries, Point, Poly, RatFun, Rational};
pub use weyl::{DiffOp, Direction, LogExpSeries, LogExpTerm};

