//! Exact scalars and truncated power series.

mod jet;
mod rational;

pub use jet::SeriesJet;
pub use rational::{binomial, expm1, Rational};

pub(crate) use rational::big_pow;
