//! Numerical laboratory for Funk and Hilbert geometry of planar convex bodies.
//!
//! The crate provides convex-body geometry (support functions, polarity,
//! projective maps, conics), Funk/Hilbert metrics, Funk billiards with
//! caustics and duality checks, Holmes-Thompson volumes and Mahler-type
//! integrals, grid-based Legendre transforms with twisted-product
//! inequalities, and spherical curve machinery for the projective
//! invariant `B_K(z)` including its regularized value at `z = -3`.
//!
//! All computations are deterministic: quadrature is adaptive
//! Gauss-Kronrod, Monte Carlo paths use a counter-based generator keyed
//! by `(seed, stream, counter)`, and parallel reductions run in a fixed
//! order.

pub mod beta;
pub mod billiards;
pub mod check;
pub mod functional;
pub mod funk;
pub mod geom;
pub mod input;
pub mod numerics;
pub mod svg;
pub mod volumes;
