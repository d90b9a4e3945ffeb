//! Deterministic numerical kernels: adaptive 1D quadrature, bracketed
//! root finding, scalar maximization, Richardson extrapolation, a
//! counter-based random number stream, and fixed-order parallel reduction.

mod opt;
mod parallel;
mod quad;
mod richardson;
mod rng;
mod roots;
mod special;

pub use opt::{cyclic_ascent, maximize_scalar};
pub use parallel::{par_sum_chunks, thread_budget};
pub use quad::{gauss_legendre, integrate_1d, QuadResult, QuadratureSpec};
pub use richardson::{richardson_limit, RichardsonResult};
pub use rng::RngStream;
pub use roots::find_root;
pub use special::{double_factorial, gamma_fn, unit_ball_volume};

use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum NumericsError {
    /// The subdivision budget ran out before tolerances were met. The
    /// best available estimate and its error bound are attached.
    #[error("quadrature budget exhausted: estimate {estimate}, error bound {error_bound} after {subdivisions} subdivisions")]
    BudgetExhausted {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },
    /// A root bracket does not actually bracket a sign change.
    #[error("invalid bracket [{a}, {b}]: f(a) = {fa}, f(b) = {fb} have the same sign")]
    InvalidBracket { a: f64, b: f64, fa: f64, fb: f64 },
    /// Input data violates a precondition (detail in the message).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
