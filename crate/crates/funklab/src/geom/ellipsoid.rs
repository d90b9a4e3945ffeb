//! Ellipsoids in dimension n with closed-form volume data.

use nalgebra::{DMatrix, DVector, Matrix2};

use super::{GeomError, Point, SupportBody2};
use crate::numerics::{integrate_1d, unit_ball_volume, QuadratureSpec};

/// `{ x : <A (x - c), x - c> <= 1 }` with SPD `A`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    a: DMatrix<f64>,
    c: DVector<f64>,
}

impl Ellipsoid {
    /// Builds an ellipsoid; `a` must be symmetric positive definite.
    pub fn new(a: DMatrix<f64>, c: DVector<f64>) -> Result<Self, GeomError> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || c.len() != n {
            return Err(GeomError::InvalidInput("dimension mismatch".into()));
        }
        if (&a - a.transpose()).norm() > 1e-12 * a.norm() {
            return Err(GeomError::InvalidInput("ellipsoid matrix must be symmetric".into()));
        }
        let sym = 0.5 * (&a + a.transpose());
        if sym.clone().cholesky().is_none() {
            return Err(GeomError::InvalidInput(
                "ellipsoid matrix must be positive definite".into(),
            ));
        }
        Ok(Ellipsoid { a: sym, c })
    }

    /// Unit Euclidean ball in dimension `n`.
    pub fn unit_ball(n: usize) -> Self {
        Ellipsoid::new(DMatrix::identity(n, n), DVector::zeros(n)).expect("identity is SPD")
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// The defining matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Center point.
    pub fn center(&self) -> &DVector<f64> {
        &self.c
    }

    /// Euclidean volume `omega_n / sqrt(det A)`.
    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) / self.a.determinant().sqrt()
    }

    /// Volume of the dual body at a point a fraction `rho` of the way
    /// from the center to the boundary:
    /// `omega_n sqrt(det A) / (1 - rho^2)^{(n+1)/2}`.
    ///
    /// The value does not depend on the boundary direction.
    pub fn dual_volume_at_fraction(&self, rho: f64) -> Result<f64, GeomError> {
        if !(0.0..1.0).contains(&rho) {
            return Err(GeomError::InvalidInput(format!(
                "rho must lie in [0, 1), got {rho}"
            )));
        }
        let n = self.dim() as f64;
        Ok(unit_ball_volume(self.dim()) * self.a.determinant().sqrt()
            / (1.0 - rho * rho).powf((n + 1.0) / 2.0))
    }

    /// The Mahler-type integral of the dual volumes over the homothet
    /// of ratio `rho` about the center:
    /// `n omega_n^2 int_0^rho t^{n-1} (1 - t^2)^{-(n+1)/2} dt`.
    ///
    /// GL-invariant, hence independent of `A` and the center.
    pub fn mahler_tilde_closed(&self, rho: f64) -> Result<f64, GeomError> {
        if !(0.0..1.0).contains(&rho) {
            return Err(GeomError::InvalidInput(format!(
                "rho must lie in [0, 1), got {rho}"
            )));
        }
        let n = self.dim() as f64;
        let omega = unit_ball_volume(self.dim());
        if rho == 0.0 {
            return Ok(0.0);
        }
        let f = |t: f64| t.powf(n - 1.0) * (1.0 - t * t).powf(-(n + 1.0) / 2.0);
        let v = integrate_1d(&f, 0.0, rho, &QuadratureSpec::default())
            .map_err(|e| GeomError::InvalidInput(e.to_string()))?
            .value;
        Ok(n * omega * omega * v)
    }

    /// Planar support body (dimension 2 only).
    pub fn to_support_body(&self) -> Result<SupportBody2, GeomError> {
        if self.dim() != 2 {
            return Err(GeomError::InvalidInput(
                "support bodies exist only in dimension 2".into(),
            ));
        }
        let a = Matrix2::new(self.a[(0, 0)], self.a[(0, 1)], self.a[(1, 0)], self.a[(1, 1)]);
        SupportBody2::ellipse(a, Point::new(self.c[0], self.c[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_of_unit_balls() {
        assert!((Ellipsoid::unit_ball(2).volume() - std::f64::consts::PI).abs() < 1e-14);
        assert!(
            (Ellipsoid::unit_ball(3).volume() - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14
        );
    }

    #[test]
    fn dual_volume_of_disc_at_half_radius() {
        // Oracle: omega_2 / (1 - 1/4)^{3/2} = pi / 0.75^1.5.
        let want = std::f64::consts::PI / 0.75_f64.powf(1.5);
        assert!((want - 4.836_798_304_624_581).abs() < 1e-12);
        let got = Ellipsoid::unit_ball(2).dual_volume_at_fraction(0.5).unwrap();
        assert!((got - want).abs() < 1e-13, "got {got}");
    }

    #[test]
    fn mahler_tilde_disc_golden() {
        // Oracle: 2 pi^2 ((1 - rho^2)^{-1/2} - 1) at rho = 1/2.
        let pi = std::f64::consts::PI;
        let want = 2.0 * pi * pi * (0.75_f64.powf(-0.5) - 1.0);
        assert!((want - 3.053_666_228_877_507).abs() < 1e-10);
        let got = Ellipsoid::unit_ball(2).mahler_tilde_closed(0.5).unwrap();
        assert!((got - want).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn mahler_tilde_is_gl_invariant_by_construction() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.9]);
        let e = Ellipsoid::new(a, DVector::from_row_slice(&[0.2, -0.1])).unwrap();
        let b = Ellipsoid::unit_ball(2);
        assert_eq!(
            e.mahler_tilde_closed(0.4).unwrap(),
            b.mahler_tilde_closed(0.4).unwrap()
        );
    }

    #[test]
    fn rejects_non_spd() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(Ellipsoid::new(a, DVector::zeros(2)).is_err());
    }
}
