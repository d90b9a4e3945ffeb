//! Homographies of the projective plane acting on affine points.

use nalgebra::{Matrix2, Matrix3, Vector3};

use super::{GeomError, Point};
use crate::numerics::RngStream;

/// An invertible 3x3 matrix modulo positive scale, acting on the
/// affine chart `(x, y) -> ((g p)_1 / (g p)_3, (g p)_2 / (g p)_3)` with
/// `p = (x, y, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct ProjectiveMap {
    m: Matrix3<f64>,
}

// Unit Frobenius norm, sign fixed by the entry of largest magnitude
// (first in row-major order on ties).
pub(crate) fn normalize_matrix(m: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = m.norm();
    let mut out = m / norm;
    let mut best = 0.0_f64;
    let mut sign = 1.0_f64;
    for r in 0..3 {
        for c in 0..3 {
            let v = out[(r, c)];
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
    }
    if sign < 0.0 {
        out = -out;
    }
    out
}

impl ProjectiveMap {
    /// Wraps a matrix; fails when it is singular.
    pub fn new(m: Matrix3<f64>) -> Result<Self, GeomError> {
        let norm = m.norm();
        if !(norm > 0.0) || m.determinant().abs() < 1e-14 * norm.powi(3) {
            return Err(GeomError::Degenerate("projective matrix must be invertible".into()));
        }
        Ok(ProjectiveMap { m: normalize_matrix(&m) })
    }

    /// Identity map.
    pub fn identity() -> Self {
        ProjectiveMap { m: Matrix3::identity() }
    }

    /// The affine map `x -> L x + t`.
    pub fn affine(linear: Matrix2<f64>, t: Point) -> Result<Self, GeomError> {
        let mut m = Matrix3::identity();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&linear);
        m[(0, 2)] = t.x;
        m[(1, 2)] = t.y;
        Self::new(m)
    }

    /// The normalized matrix.
    pub fn matrix(&self) -> Matrix3<f64> {
        self.m
    }

    /// Inverse homography.
    pub fn inverse(&self) -> Self {
        ProjectiveMap {
            m: normalize_matrix(&self.m.try_inverse().expect("validated invertible")),
        }
    }

    /// Composition `self` after `other`.
    pub fn compose(&self, other: &Self) -> Self {
        ProjectiveMap { m: normalize_matrix(&(self.m * other.m)) }
    }

    /// Third homogeneous coordinate of the image of `p` (chart depth).
    pub fn third_coordinate(&self, p: Point) -> f64 {
        self.m[(2, 0)] * p.x + self.m[(2, 1)] * p.y + self.m[(2, 2)]
    }

    /// Image of an affine point; fails near the line sent to infinity.
    pub fn apply_point(&self, p: Point) -> Result<Point, GeomError> {
        let w = self.third_coordinate(p);
        if w.abs() < 1e-13 * (1.0 + p.norm()) {
            return Err(GeomError::ChartViolation);
        }
        let hx = self.m[(0, 0)] * p.x + self.m[(0, 1)] * p.y + self.m[(0, 2)];
        let hy = self.m[(1, 0)] * p.x + self.m[(1, 1)] * p.y + self.m[(1, 2)];
        Ok(Point::new(hx / w, hy / w))
    }

    /// Image of a point that must stay in the positive chart (call
    /// [`Self::oriented_for`] first to fix the sign convention).
    pub fn apply_point_in_chart(&self, p: Point) -> Result<Point, GeomError> {
        if self.third_coordinate(p) <= 1e-13 * (1.0 + p.norm()) {
            return Err(GeomError::ChartViolation);
        }
        self.apply_point(p)
    }

    /// Returns the sign-flipped representative whose third coordinate
    /// is positive at `anchor`.
    pub fn oriented_for(&self, anchor: Point) -> Result<Self, GeomError> {
        let w = self.third_coordinate(anchor);
        if w.abs() < 1e-13 * (1.0 + anchor.norm()) {
            return Err(GeomError::ChartViolation);
        }
        Ok(ProjectiveMap { m: if w < 0.0 { -self.m } else { self.m } })
    }

    /// Image of a line in homogeneous coordinates: `w -> g^{-T} w`.
    pub fn apply_line(&self, w: Vector3<f64>) -> Vector3<f64> {
        self.m.try_inverse().expect("validated invertible").transpose() * w
    }

    /// Jacobian of the chart action at `p`:
    /// `d(f_i)/d(x_j) = (m_ij - f_i m_3j) / w`.
    pub fn jacobian(&self, p: Point) -> Result<Matrix2<f64>, GeomError> {
        let w = self.third_coordinate(p);
        if w.abs() < 1e-13 * (1.0 + p.norm()) {
            return Err(GeomError::ChartViolation);
        }
        let f = self.apply_point(p)?;
        let mut j = Matrix2::zeros();
        for r in 0..2 {
            let fr = if r == 0 { f.x } else { f.y };
            for cidx in 0..2 {
                j[(r, cidx)] = (self.m[(r, cidx)] - fr * self.m[(2, cidx)]) / w;
            }
        }
        Ok(j)
    }

    /// A seeded homography `I + scale * U` with `U` uniform in
    /// `[-1, 1]^{3x3}`, drawn at `counter` of `rng`.
    pub fn near_identity(rng: &RngStream, counter: u64, scale: f64) -> Self {
        let mut m = Matrix3::identity();
        for k in 0..9_u64 {
            let r = 2.0 * rng.uniform_at(9 * counter + k) - 1.0;
            m[((k / 3) as usize, (k % 3) as usize)] += scale * r;
        }
        Self::new(m).expect("near-identity perturbation stays invertible")
    }
}

/// Cross-ratio of four collinear points, evaluated through signed
/// parameters along the dominant direction:
/// `((t3 - t1)(t4 - t2)) / ((t3 - t2)(t4 - t1))`.
pub fn cross_ratio(p1: Point, p2: Point, p3: Point, p4: Point) -> f64 {
    let dir = {
        let d = p4 - p1;
        let alt = p3 - p2;
        if d.norm() >= alt.norm() { d } else { alt }
    }
    .normalize();
    let t = |p: Point| (p - p1).dot(&dir);
    let (t1, t2, t3, t4) = (0.0, t(p2), t(p3), t(p4));
    ((t3 - t1) * (t4 - t2)) / ((t3 - t2) * (t4 - t1))
}
