//! Planar convex bodies and their projective/duality toolkit: support
//! functions, gauges, polars, dual bodies at interior points, projective
//! images, conics and pencils, plus ellipsoid and lp-ball families with
//! closed-form data in dimensions 2 and 3.

mod body;
mod conic;
mod ellipsoid;
mod fourier;
mod lp;
mod projective;

pub use body::{SupportBody2, DEFAULT_N};
pub use conic::{harmonic_residual, Conic, PencilKind};
pub use ellipsoid::Ellipsoid;
pub use fourier::TrigSeries;
pub use lp::LpBall;
pub use projective::{cross_ratio, ProjectiveMap};

use thiserror::Error;

/// A point or vector in the plane.
pub type Point = nalgebra::Vector2<f64>;

/// Errors from geometric operations.
#[derive(Debug, Clone, Error)]
pub enum GeomError {
    /// A point that must lie strictly inside the body does not.
    #[error("point ({0}, {1}) is not interior")]
    NotInterior(f64, f64),
    /// A point that must lie strictly outside the body does not.
    #[error("point ({0}, {1}) is not exterior")]
    NotExterior(f64, f64),
    /// Sample data fails convexity or positivity validation.
    #[error("not a valid convex body: {0}")]
    NotConvex(String),
    /// A projective image leaves the affine chart.
    #[error("body crosses infinity under the projective map")]
    ChartViolation,
    /// A conic or matrix is degenerate where a non-degenerate one is
    /// required.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Curvature was requested on a body admitted with the relaxed
    /// (non-strict) convexity invariant.
    #[error("curvature unavailable: body is not strictly convex at sampling resolution")]
    CurvatureUnavailable,
    /// Malformed construction data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Unit vector at angle `theta`.
pub fn unit(theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    Point::new(c, s)
}

/// Unit vector rotated a quarter turn from `unit(theta)`.
pub fn unit_perp(theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    Point::new(-s, c)
}

/// Cross product z-component of two plane vectors.
pub fn cross2(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}
