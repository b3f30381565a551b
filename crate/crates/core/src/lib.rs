//! Stochastic k-TSP: adaptive and non-adaptive covering policies, exact
//! small-instance optima, Monte Carlo evaluation and adaptivity-gap tooling.

pub mod adaptive;
pub mod error;
pub mod evaluation;
pub mod exact_opt;
pub mod gap;
pub mod model;
pub mod nonadaptive;
pub mod orienteering;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Simplex over exact rationals.
pub type ExactLp = gap::LinearProgram<Rational>;
/// Simplex over `f64`.
pub type FloatLp = gap::LinearProgram<f64>;
