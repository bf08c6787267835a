//! Exact truncated Laurent series over ℚ and matrices of them.

pub mod matrix;
pub mod rational;
pub mod series;

pub use matrix::{MatrixSeries, DEFAULT_PRECISION};
pub use rational::{int, rat, Rational};
pub use series::{Order, Series};
