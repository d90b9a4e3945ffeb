//! Funk, reverse-Funk and Hilbert metrics inside a convex body:
//! distances, Finsler norms, curve lengths, and outward metric balls.

use std::cell::Cell;

use crate::geom::{GeomError, Point, SupportBody2};
use crate::numerics::{integrate_1d, QuadratureSpec};

/// Which of the three metrics to evaluate. The Hilbert metric is always
/// the symmetrization `(funk + reverse funk) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Funk,
    ReverseFunk,
    Hilbert,
}

/// An ambient convex body together with a chart tag naming the affine
/// chart in which its support samples live.
#[derive(Debug, Clone)]
pub struct FunkContext {
    body: SupportBody2,
    chart: String,
}

/// An ordered list of interior points, optionally closed.
#[derive(Debug, Clone)]
pub struct Polyline {
    /// Vertices in order.
    pub points: Vec<Point>,
    /// Whether the last point connects back to the first.
    pub closed: bool,
}

impl Polyline {
    /// Builds a polyline; needs at least two points.
    pub fn new(points: Vec<Point>, closed: bool) -> Result<Self, GeomError> {
        if points.len() < 2 {
            return Err(GeomError::InvalidInput("polyline needs at least 2 points".into()));
        }
        Ok(Polyline { points, closed })
    }
}

impl FunkContext {
    /// Wraps a body in the default affine chart.
    pub fn new(body: SupportBody2) -> Self {
        Self::with_chart(body, "affine")
    }

    /// Wraps a body with an explicit chart tag.
    pub fn with_chart(body: SupportBody2, chart: impl Into<String>) -> Self {
        FunkContext { body, chart: chart.into() }
    }

    /// The ambient body.
    pub fn body(&self) -> &SupportBody2 {
        &self.body
    }

    /// The chart tag.
    pub fn chart(&self) -> &str {
        &self.chart
    }

    fn check_interior(&self, x: Point) -> Result<(), GeomError> {
        if self.body.gauge(x) >= 1.0 - 1e-12 {
            return Err(GeomError::NotInterior(x.x, x.y));
        }
        Ok(())
    }

    /// Distance between interior points in the chosen metric.
    ///
    /// The forward Funk distance is `log(t_b / (t_b - 1))` where
    /// `x + t_b (y - x)` is the forward ray exit.
    pub fn distance(&self, kind: MetricKind, x: Point, y: Point) -> Result<f64, GeomError> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        match kind {
            MetricKind::Funk => self.funk_distance(x, y),
            MetricKind::ReverseFunk => self.funk_distance(y, x),
            MetricKind::Hilbert => {
                Ok(0.5 * (self.funk_distance(x, y)? + self.funk_distance(y, x)?))
            }
        }
    }

    fn funk_distance(&self, x: Point, y: Point) -> Result<f64, GeomError> {
        if x == y {
            return Ok(0.0);
        }
        let (t_b, _) = self.body.ray_exit(x, y - x)?;
        // log(t / (t - 1)) evaluated stably for large t.
        Ok((1.0 / (t_b - 1.0)).ln_1p())
    }

    /// Finsler norm `phi(x, v) = 1 / t` with `t` the exit parameter of
    /// the ray `x + t v`; positively homogeneous of degree 1 in `v` and
    /// generally asymmetric.
    pub fn funk_norm(&self, x: Point, v: Point) -> Result<f64, GeomError> {
        self.check_interior(x)?;
        let (t, _) = self.body.ray_exit(x, v)?;
        Ok(1.0 / t)
    }

    /// Gradient of `d^F(x, .)` at `y`: `n_b / (|b - y| <n_b, e>)` with
    /// `b` the forward exit of the ray from `x` through `y`, `n_b` the
    /// outward normal there, and `e` the unit ray direction.
    pub fn funk_distance_grad_y(&self, x: Point, y: Point) -> Result<Point, GeomError> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        let e = (y - x).normalize();
        let (_, b, n) = self.body.ray_exit_with_normal(x, y - x)?;
        Ok(n / ((b - y).norm() * n.dot(&e)))
    }

    /// Gradient of `d^F(., y)` at `x`: `-n_b / (|b - x| <n_b, e>)`.
    pub fn funk_distance_grad_x(&self, x: Point, y: Point) -> Result<Point, GeomError> {
        self.check_interior(x)?;
        self.check_interior(y)?;
        let e = (y - x).normalize();
        let (_, b, n) = self.body.ray_exit_with_normal(x, y - x)?;
        Ok(-n / ((b - x).norm() * n.dot(&e)))
    }

    /// Length of a parametrized curve in the chosen metric, by adaptive
    /// quadrature of the Finsler norm. `dgamma` is the derivative of
    /// `gamma`. The Hilbert length is the average of the two Funk
    /// lengths by construction.
    pub fn curve_length<F, G>(
        &self,
        kind: MetricKind,
        gamma: F,
        dgamma: G,
        t0: f64,
        t1: f64,
    ) -> Result<f64, GeomError>
    where
        F: Fn(f64) -> Point,
        G: Fn(f64) -> Point,
    {
        match kind {
            MetricKind::Funk => self.funk_curve_length(&gamma, &dgamma, t0, t1, false),
            MetricKind::ReverseFunk => self.funk_curve_length(&gamma, &dgamma, t0, t1, true),
            MetricKind::Hilbert => Ok(0.5
                * (self.funk_curve_length(&gamma, &dgamma, t0, t1, false)?
                    + self.funk_curve_length(&gamma, &dgamma, t0, t1, true)?)),
        }
    }

    fn funk_curve_length(
        &self,
        gamma: &dyn Fn(f64) -> Point,
        dgamma: &dyn Fn(f64) -> Point,
        t0: f64,
        t1: f64,
        reversed: bool,
    ) -> Result<f64, GeomError> {
        let touched = Cell::new(false);
        let f = |t: f64| {
            let x = gamma(t);
            if self.body.gauge(x) > 1.0 - 1e-9 {
                touched.set(true);
                return 0.0;
            }
            let v = if reversed { -dgamma(t) } else { dgamma(t) };
            if v.norm() == 0.0 {
                return 0.0;
            }
            let (t_exit, _) = self.body.ray_exit(x, v).expect("interior point checked");
            1.0 / t_exit
        };
        let value = integrate_1d(&f, t0, t1, &QuadratureSpec::default())
            .map_err(|e| GeomError::InvalidInput(e.to_string()))?
            .value;
        if touched.get() {
            return Err(GeomError::NotInterior(f64::NAN, f64::NAN));
        }
        Ok(value)
    }

    /// Length of a polyline: the sum of segment lengths, each computed
    /// by quadrature of the Finsler norm along the segment.
    pub fn polyline_length(&self, kind: MetricKind, poly: &Polyline) -> Result<f64, GeomError> {
        for &p in &poly.points {
            self.check_interior(p)?;
        }
        let mut pts: Vec<Point> = poly.points.clone();
        if poly.closed {
            pts.push(pts[0]);
        }
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            total += self.curve_length(kind, |t| a + t * (b - a), |_| b - a, 0.0, 1.0)?;
        }
        Ok(total)
    }

    /// The outward Funk metric ball `q + (1 - e^{-r})(L - q)`.
    ///
    /// Every boundary point of the result is at Funk distance exactly
    /// `r` from `q`. Fails for `r = 0` (a point is not a valid body)
    /// and when the homothet does not contain the coordinate origin.
    pub fn funk_ball(&self, q: Point, r: f64) -> Result<SupportBody2, GeomError> {
        self.check_interior(q)?;
        if !(r > 0.0) {
            return Err(GeomError::Degenerate(format!(
                "funk ball of radius {r} degenerates to a point"
            )));
        }
        self.body.shrink_toward(q, -(-r).exp_m1())
    }
}
