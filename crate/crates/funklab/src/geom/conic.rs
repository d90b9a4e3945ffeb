//! Conics as symmetric 3x3 matrices modulo scale, with pencils,
//! harmonic quadruplets, and least-squares fitting.

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};

use super::projective::{normalize_matrix, ProjectiveMap};
use super::{GeomError, Point};

/// Which combination a pencil member takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilKind {
    /// `t S_1 + (1 - t) S_2`.
    Linear,
    /// `(t S_1^{-1} + (1 - t) S_2^{-1})^{-1}`.
    Dual,
}

/// A conic `{ P : P^T S P = 0 }` with `S` symmetric.
///
/// The matrix is kept as given (conics are only defined up to scale,
/// but pencil arithmetic acts on the chosen representatives);
/// comparisons normalize to unit Frobenius norm with a deterministic
/// sign.
#[derive(Debug, Clone, Copy)]
pub struct Conic {
    s: Matrix3<f64>,
}

impl Conic {
    /// Wraps a symmetric matrix (symmetrized).
    pub fn new(s: Matrix3<f64>) -> Result<Self, GeomError> {
        let norm = s.norm();
        if !(norm > 0.0) {
            return Err(GeomError::InvalidInput("zero conic matrix".into()));
        }
        if (s - s.transpose()).norm() > 1e-9 * norm {
            return Err(GeomError::InvalidInput("conic matrix must be symmetric".into()));
        }
        Ok(Conic { s: 0.5 * (s + s.transpose()) })
    }

    /// The conic of the ellipse `{ <A (x - c), x - c> = 1 }`.
    pub fn from_ellipse(a: Matrix2<f64>, c: Point) -> Self {
        let ac = a * c;
        let mut s = Matrix3::zeros();
        s.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
        s[(0, 2)] = -ac.x;
        s[(1, 2)] = -ac.y;
        s[(2, 0)] = -ac.x;
        s[(2, 1)] = -ac.y;
        s[(2, 2)] = ac.dot(&c) - 1.0;
        Conic::new(s).expect("ellipse conic is symmetric and nonzero")
    }

    /// The conic matrix (as-constructed representative).
    pub fn matrix(&self) -> Matrix3<f64> {
        self.s
    }

    /// Whether the conic is degenerate (zero determinant after
    /// normalizing the representative).
    pub fn is_degenerate(&self) -> bool {
        let n = self.s.norm();
        (self.s / n).determinant().abs() < 1e-12
    }

    /// Quadratic form value at an affine point.
    pub fn evaluate(&self, p: Point) -> f64 {
        let v = Vector3::new(p.x, p.y, 1.0);
        (self.s * v).dot(&v)
    }

    /// Inverse matrix; fails on degenerate conics.
    pub fn inverse_matrix(&self) -> Result<Matrix3<f64>, GeomError> {
        if self.is_degenerate() {
            return Err(GeomError::Degenerate("conic has zero determinant".into()));
        }
        Ok(self.s.try_inverse().expect("non-degenerate"))
    }

    /// Member of the pencil spanned by two conics.
    pub fn pencil_member(c1: &Conic, c2: &Conic, t: f64, kind: PencilKind) -> Result<Conic, GeomError> {
        let s = match kind {
            PencilKind::Linear => t * c1.s + (1.0 - t) * c2.s,
            PencilKind::Dual => {
                let m = t * c1.inverse_matrix()? + (1.0 - t) * c2.inverse_matrix()?;
                m.try_inverse()
                    .ok_or_else(|| GeomError::Degenerate("dual pencil combination is singular".into()))?
            }
        };
        Conic::new(s)
    }

    /// Image under a homography: `S -> g^{-T} S g^{-1}`.
    pub fn apply_projective(&self, g: &ProjectiveMap) -> Conic {
        let gi = g.matrix().try_inverse().expect("homographies are invertible");
        Conic::new(gi.transpose() * self.s * gi).expect("image of a conic is a conic")
    }

    /// Frobenius distance after normalizing both representatives.
    pub fn frobenius_distance(&self, other: &Conic) -> f64 {
        (normalize_matrix(&self.s) - normalize_matrix(&other.s)).norm()
    }

    /// Scale-invariant tangency defect of a line `w` (homogeneous):
    /// `<S^{-1} w, w>` normalized by `||S^{-1}||_F ||w||^2`.
    pub fn tangency_residual(&self, w: Vector3<f64>) -> Result<f64, GeomError> {
        let inv = self.inverse_matrix()?;
        let denom = inv.norm() * w.norm_squared();
        Ok(((inv * w).dot(&w) / denom).abs())
    }

    /// Least-squares conic through a point set (at least 5 points):
    /// smallest right singular vector of the design matrix.
    pub fn fit(points: &[Point]) -> Result<Conic, GeomError> {
        if points.len() < 5 {
            return Err(GeomError::InvalidInput(format!(
                "conic fit needs at least 5 points, got {}",
                points.len()
            )));
        }
        let rows = points.len();
        let mut design = DMatrix::zeros(rows, 6);
        for (i, p) in points.iter().enumerate() {
            design[(i, 0)] = p.x * p.x;
            design[(i, 1)] = p.x * p.y;
            design[(i, 2)] = p.y * p.y;
            design[(i, 3)] = p.x;
            design[(i, 4)] = p.y;
            design[(i, 5)] = 1.0;
        }
        let svd = design.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let k = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let v = v_t.row(k);
        let s = Matrix3::new(
            v[0],
            0.5 * v[1],
            0.5 * v[3],
            0.5 * v[1],
            v[2],
            0.5 * v[4],
            0.5 * v[3],
            0.5 * v[4],
            v[5],
        );
        Conic::new(s)
    }
}

/// Harmonic defect of a quadruplet: Frobenius distance between the
/// normalized `S_2^{-1} S_1` and `S_4^{-1} S_3`; zero exactly on
/// harmonic quadruplets.
pub fn harmonic_residual(q1: &Conic, q2: &Conic, q3: &Conic, q4: &Conic) -> Result<f64, GeomError> {
    let m_a = q2.inverse_matrix()? * q1.matrix();
    let m_b = q4.inverse_matrix()? * q3.matrix();
    Ok((normalize_matrix(&m_a) - normalize_matrix(&m_b)).norm())
}

/// Recovers `(A, c)` with `{ <A (x - c), x - c> <= 1 }` from a conic
/// matrix when it is a real ellipse.
pub fn extract_ellipse(s: &Matrix3<f64>) -> Option<(Matrix2<f64>, Point)> {
    let mut s = *s;
    let a2: Matrix2<f64> = s.fixed_view::<2, 2>(0, 0).into();
    // Orient so the quadratic part is positive definite.
    if a2.trace() < 0.0 {
        s = -s;
    }
    let a2: Matrix2<f64> = s.fixed_view::<2, 2>(0, 0).into();
    if a2.determinant() <= 0.0 || a2.trace() <= 0.0 {
        return None;
    }
    let b = Point::new(s[(0, 2)], s[(1, 2)]);
    let inv = a2.try_inverse()?;
    let center = -(inv * b);
    let mu = b.dot(&(inv * b)) - s[(2, 2)];
    if mu <= 0.0 {
        return None;
    }
    Some((a2 / mu, center))
}
