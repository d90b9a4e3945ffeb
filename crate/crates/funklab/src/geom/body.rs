//! Support-function representation of planar convex bodies.

use nalgebra::{Matrix2, Vector3};

use super::fourier::TrigSeries;
use super::projective::ProjectiveMap;
use super::{cross2, unit, unit_perp, GeomError, Point};
use crate::numerics::{find_root, integrate_1d, maximize_scalar, QuadratureSpec};

/// Default number of support samples.
pub const DEFAULT_N: usize = 512;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Exact backing geometry for bodies constructed from closed-form
/// families. `Spectral` means the trigonometric interpolant of the
/// samples is the ground truth.
#[derive(Debug, Clone)]
enum Profile {
    Spectral,
    /// `{ x : <A (x - c), x - c> <= 1 }` with SPD `A`.
    Ellipse { a: Matrix2<f64>, c: Point },
    /// Strictly convex vertex list, counterclockwise, origin interior.
    Polygon { verts: Vec<Point> },
    /// `c + { x : sum_i (w_i |x_i|)^p <= 1 }` with `1 < p < infinity`.
    Lp { p: f64, w: [f64; 2], c: Point },
}

/// A planar convex body with the origin in its interior, represented by
/// `N` support samples `h(2 pi j / N)` plus cached first and second
/// derivative tables.
///
/// Bodies from closed-form families (ellipses, polygons, lp balls)
/// additionally carry their exact geometry, which gauge, support, and
/// ray queries use; generic bodies are evaluated through the spectral
/// interpolant of their samples.
#[derive(Debug, Clone)]
pub struct SupportBody2 {
    n: usize,
    h: Vec<f64>,
    hp: Vec<f64>,
    hpp: Vec<f64>,
    units: std::sync::Arc<Vec<Point>>,
    series: TrigSeries,
    profile: Profile,
    max_h: f64,
    min_radius: f64,
}

// Unit vectors of the uniform node angles, shared across the many
// short-lived bodies built during dual-area evaluations.
fn node_units(n: usize) -> std::sync::Arc<Vec<Point>> {
    use std::cell::RefCell;
    use std::sync::Arc;
    thread_local! {
        static CACHE: RefCell<Vec<(usize, Arc<Vec<Point>>)>> = const { RefCell::new(Vec::new()) };
    }
    CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if let Some((_, u)) = cache.iter().find(|(m, _)| *m == n) {
            return u.clone();
        }
        let u: Arc<Vec<Point>> =
            Arc::new((0..n).map(|j| unit(TWO_PI * j as f64 / n as f64)).collect());
        cache.push((n, u.clone()));
        u
    })
}

impl SupportBody2 {
    // ------------------------------------------------------------------
    // Constructors
    // ------------------------------------------------------------------

    /// Builds a body from support samples at uniform normal angles.
    ///
    /// Requires an even count of at least 64, strictly positive values,
    /// and a nonnegative spectral radius of curvature table.
    pub fn from_support_samples(h: Vec<f64>) -> Result<Self, GeomError> {
        Self::build(h, Profile::Spectral)
    }

    /// Samples a support function at `n` uniform angles.
    pub fn from_support_fn<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<Self, GeomError> {
        let h: Vec<f64> = (0..n).map(|j| f(TWO_PI * j as f64 / n as f64)).collect();
        Self::build(h, Profile::Spectral)
    }

    /// Builds a body from interleaved Fourier coefficients of its
    /// support function: `(a_0, a_1, b_1, a_2, b_2, ...)`.
    pub fn from_fourier_coeffs(coeffs: &[f64], n: usize) -> Result<Self, GeomError> {
        let series = TrigSeries::from_interleaved(coeffs, n);
        Self::build(series.sample(n), Profile::Spectral)
    }

    /// Fits a body to a point cloud by taking the support function of
    /// its convex hull at `n` uniform angles.
    pub fn from_boundary_points(pts: &[Point], n: usize) -> Result<Self, GeomError> {
        if pts.len() < 3 {
            return Err(GeomError::InvalidInput(
                "need at least 3 boundary points".into(),
            ));
        }
        let h: Vec<f64> = (0..n)
            .map(|j| {
                let u = unit(TWO_PI * j as f64 / n as f64);
                pts.iter().map(|p| p.dot(&u)).fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Self::build(h, Profile::Spectral)
    }

    /// Disc of radius `r` centered at the origin.
    pub fn disc(r: f64) -> Self {
        Self::ellipse(Matrix2::identity() / (r * r), Point::zeros()).expect("disc is valid")
    }

    /// Ellipse `{ x : <A (x - c), x - c> <= 1 }`; the origin must be
    /// interior.
    pub fn ellipse(a: Matrix2<f64>, c: Point) -> Result<Self, GeomError> {
        if (a - a.transpose()).norm() > 1e-12 * a.norm() {
            return Err(GeomError::InvalidInput("ellipse matrix must be symmetric".into()));
        }
        let a = 0.5 * (a + a.transpose());
        if a.determinant() <= 0.0 || a.trace() <= 0.0 {
            return Err(GeomError::InvalidInput(
                "ellipse matrix must be positive definite".into(),
            ));
        }
        if (a * c).dot(&c) >= 1.0 {
            return Err(GeomError::InvalidInput(
                "origin must be interior to the ellipse".into(),
            ));
        }
        let profile = Profile::Ellipse { a, c };
        let h = profile_support_table(&profile, DEFAULT_N);
        Self::build(h, profile)
    }

    /// Convex polygon from its vertices (any order); the origin must be
    /// interior.
    pub fn polygon(verts: &[Point]) -> Result<Self, GeomError> {
        if verts.len() < 3 {
            return Err(GeomError::InvalidInput("polygon needs at least 3 vertices".into()));
        }
        let mut vs = verts.to_vec();
        // Counterclockwise order around the centroid of the vertices.
        let anchor = vs.iter().sum::<Point>() / vs.len() as f64;
        vs.sort_by(|p, q| {
            let ap = (p - anchor).y.atan2((p - anchor).x);
            let aq = (q - anchor).y.atan2((q - anchor).x);
            ap.partial_cmp(&aq).unwrap_or(std::cmp::Ordering::Equal)
        });
        let m = vs.len();
        let scale = vs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..m {
            let e0 = vs[(i + 1) % m] - vs[i];
            let e1 = vs[(i + 2) % m] - vs[(i + 1) % m];
            if cross2(e0, e1) <= 1e-12 * scale * scale {
                return Err(GeomError::NotConvex(
                    "polygon vertices are not in strictly convex position".into(),
                ));
            }
        }
        for i in 0..m {
            let (n_e, d_e) = edge_halfplane(vs[i], vs[(i + 1) % m]);
            if d_e <= 1e-12 * scale {
                return Err(GeomError::InvalidInput(
                    "origin must be interior to the polygon".into(),
                ));
            }
            let _ = n_e;
        }
        let profile = Profile::Polygon { verts: vs };
        let h = profile_support_table(&profile, DEFAULT_N);
        Self::build(h, profile)
    }

    /// Weighted lp ball `{ x : sum (w_i |x_i|)^p <= 1 }`. `p = 1` and
    /// `p = infinity` become their exact polygons.
    pub fn lp_ball(p: f64, w: [f64; 2]) -> Result<Self, GeomError> {
        if !(p >= 1.0) || !(w[0] > 0.0) || !(w[1] > 0.0) {
            return Err(GeomError::InvalidInput(format!(
                "lp ball needs p >= 1 and positive weights, got p = {p}, w = {w:?}"
            )));
        }
        let (rx, ry) = (1.0 / w[0], 1.0 / w[1]);
        if p == 1.0 {
            return Self::polygon(&[
                Point::new(rx, 0.0),
                Point::new(0.0, ry),
                Point::new(-rx, 0.0),
                Point::new(0.0, -ry),
            ]);
        }
        if p.is_infinite() {
            return Self::polygon(&[
                Point::new(rx, ry),
                Point::new(-rx, ry),
                Point::new(-rx, -ry),
                Point::new(rx, -ry),
            ]);
        }
        if p == 2.0 {
            return Self::ellipse(
                Matrix2::new(w[0] * w[0], 0.0, 0.0, w[1] * w[1]),
                Point::zeros(),
            );
        }
        let profile = Profile::Lp { p, w, c: Point::zeros() };
        let h = profile_support_table(&profile, DEFAULT_N);
        Self::build(h, profile)
    }

    fn build(h: Vec<f64>, profile: Profile) -> Result<Self, GeomError> {
        let n = h.len();
        if n < 64 || n % 2 != 0 {
            return Err(GeomError::InvalidInput(format!(
                "need an even sample count >= 64, got {n}"
            )));
        }
        let max_h = h.iter().cloned().fold(0.0, f64::max);
        if !h.iter().all(|&v| v.is_finite() && v > 0.0) {
            return Err(GeomError::NotConvex(
                "support samples must be finite and strictly positive (origin interior)".into(),
            ));
        }
        let series = TrigSeries::fit(&h);
        let (hp, hpp): (Vec<f64>, Vec<f64>) = match &profile {
            Profile::Spectral => (0..n)
                .map(|j| {
                    let (_, d1, d2) = series.eval_with_derivs(TWO_PI * j as f64 / n as f64);
                    (d1, d2)
                })
                .unzip(),
            p => (0..n)
                .map(|j| {
                    let (_, d1, d2) = profile_support_derivs(p, TWO_PI * j as f64 / n as f64);
                    (d1, d2)
                })
                .unzip(),
        };
        let min_radius = h
            .iter()
            .zip(&hpp)
            .map(|(&a, &b)| a + b)
            .fold(f64::INFINITY, f64::min);
        if min_radius < -1e-6 * max_h {
            return Err(GeomError::NotConvex(format!(
                "radius of curvature table dips to {min_radius}, body is not convex"
            )));
        }
        let units = node_units(n);
        Ok(SupportBody2 { n, h, hp, hpp, units, series, profile, max_h, min_radius })
    }

    // ------------------------------------------------------------------
    // Basic accessors
    // ------------------------------------------------------------------

    /// Number of support samples.
    pub fn sample_count(&self) -> usize {
        self.n
    }

    /// Angle of the `j`-th sample node.
    pub fn node(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.n as f64
    }

    /// The support sample table.
    pub fn support_samples(&self) -> &[f64] {
        &self.h
    }

    /// Cached first-derivative table.
    pub fn support_deriv_samples(&self) -> &[f64] {
        &self.hp
    }

    /// Cached second-derivative table.
    pub fn support_deriv2_samples(&self) -> &[f64] {
        &self.hpp
    }

    /// Largest support value.
    pub fn max_support(&self) -> f64 {
        self.max_h
    }

    /// Smallest tabulated radius of curvature `h + h''`.
    pub fn min_curvature_radius(&self) -> f64 {
        self.min_radius
    }

    /// Whether curvature-dependent operations are available (strict
    /// convexity at sampling resolution).
    pub fn is_strictly_convex(&self) -> bool {
        self.min_radius > 1e-6 * self.max_h
    }

    /// The quadratic-form matrix and center when the body is an exact
    /// ellipse `<A (x - c), x - c> <= 1`.
    pub fn as_ellipse(&self) -> Option<(Matrix2<f64>, Point)> {
        match &self.profile {
            Profile::Ellipse { a, c } => Some((*a, *c)),
            _ => None,
        }
    }

    /// Counterclockwise vertex list when the body is an exact polygon.
    pub fn vertices(&self) -> Option<&[Point]> {
        match &self.profile {
            Profile::Polygon { verts } => Some(verts),
            _ => None,
        }
    }

    // ------------------------------------------------------------------
    // Support and boundary evaluation
    // ------------------------------------------------------------------

    /// Support function at normal angle `theta`.
    pub fn support(&self, theta: f64) -> f64 {
        self.support_with_derivs(theta).0
    }

    /// Support function and its first two derivatives at `theta`.
    pub fn support_with_derivs(&self, theta: f64) -> (f64, f64, f64) {
        match &self.profile {
            Profile::Spectral => self.series.eval_with_derivs(theta),
            p => profile_support_derivs(p, theta),
        }
    }

    /// Boundary point with outward normal `unit(theta)`:
    /// `x(theta) = h u + h' u_perp`.
    pub fn boundary_point(&self, theta: f64) -> Point {
        let (h, hp, _) = self.support_with_derivs(theta);
        h * unit(theta) + hp * unit_perp(theta)
    }

    /// Velocity of the boundary parametrization,
    /// `x'(theta) = (h + h'') u_perp`.
    pub fn boundary_velocity(&self, theta: f64) -> Point {
        let (h, _, hpp) = self.support_with_derivs(theta);
        (h + hpp) * unit_perp(theta)
    }

    /// Radius of curvature `h + h''` at `theta`; refuses bodies that are
    /// not strictly convex at sampling resolution.
    pub fn curvature_radius(&self, theta: f64) -> Result<f64, GeomError> {
        if !self.is_strictly_convex() {
            return Err(GeomError::CurvatureUnavailable);
        }
        let (h, _, hpp) = self.support_with_derivs(theta);
        Ok(h + hpp)
    }

    /// Homogeneous coordinates `(u_x, u_y, -h)` of the tangent line at
    /// boundary parameter `theta`.
    pub fn tangent_line_hom(&self, theta: f64) -> Vector3<f64> {
        let u = unit(theta);
        Vector3::new(u.x, u.y, -self.support(theta))
    }

    // ------------------------------------------------------------------
    // Gauge and ray queries
    // ------------------------------------------------------------------

    // Node scan under the spectral gauge: the best node index and the
    // sampled maximum of `<x, u(t_j)> / h(t_j)`, a lower bound on the
    // gauge that is within O((2 pi / n)^2) of it.
    fn gauge_scan_argmax(&self, x: Point) -> (usize, f64) {
        let (mut best_j, mut best) = (0_usize, f64::NEG_INFINITY);
        for (j, u) in self.units.iter().enumerate() {
            let v = x.dot(u) / self.h[j];
            if v > best {
                best = v;
                best_j = j;
            }
        }
        (best_j, best)
    }

    // Certifies `z` as deep interior from the node scan alone: the
    // sampled gauge bound stays far enough below 1 that the true gauge
    // cannot reach the interior-check thresholds.
    fn certainly_deep_interior(&self, z: Point) -> bool {
        matches!(self.profile, Profile::Spectral) && self.gauge_scan_argmax(z).1 < 0.9
    }

    /// Minkowski gauge of `x` with respect to the body (0 at the
    /// origin; 1 on the boundary).
    pub fn gauge(&self, x: Point) -> f64 {
        match &self.profile {
            Profile::Spectral => {
                if x.norm() == 0.0 {
                    return 0.0;
                }
                let (best_j, best) = self.gauge_scan_argmax(x);
                let dt = TWO_PI / self.n as f64;
                let t0 = self.node(best_j);
                let f = |t: f64| {
                    let (h, _, _) = self.series.eval_with_derivs(t);
                    x.dot(&unit(t)) / h
                };
                let (_, fmax) = maximize_scalar(&f, t0 - 1.5 * dt, t0 + 1.5 * dt, 1e-13);
                fmax.max(best)
            }
            Profile::Ellipse { a, c } => {
                let ax = a * x;
                let axx = ax.dot(&x);
                if axx == 0.0 {
                    return 0.0;
                }
                let axc = ax.dot(c);
                let acc = (a * c).dot(c);
                // Largest s with s x inside; gauge is its reciprocal.
                axx / (axc + (axc * axc - axx * (acc - 1.0)).sqrt())
            }
            Profile::Polygon { verts } => {
                let m = verts.len();
                let mut best = 0.0_f64;
                for i in 0..m {
                    let (n_e, d_e) = edge_halfplane(verts[i], verts[(i + 1) % m]);
                    best = best.max(n_e.dot(&x) / d_e);
                }
                best
            }
            Profile::Lp { p, w, c } => {
                if x.norm() == 0.0 {
                    return 0.0;
                }
                // Largest s with s x in the translated ball, via the
                // convex section phi(s) = ||W (s x - c)||_p.
                let phi = |s: f64| {
                    let y = s * x - c;
                    lp_norm(w[0] * y.x, w[1] * y.y, *p) - 1.0
                };
                let mut hi = 1.0 / self.max_h.max(1.0);
                while phi(hi) < 0.0 {
                    hi *= 2.0;
                }
                let s = find_root(&phi, 0.0, hi, 1e-15).expect("gauge bracket is valid");
                1.0 / s
            }
        }
    }

    /// Whether `x` lies in the body up to `tol` in gauge units.
    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.gauge(x) <= 1.0 + tol
    }

    /// Exit of the ray `x + t v`, `t > 0`, through the boundary:
    /// returns `(t, b)`.
    pub fn ray_exit(&self, x: Point, v: Point) -> Result<(f64, Point), GeomError> {
        self.ray_exit_with_normal(x, v).map(|(t, b, _)| (t, b))
    }

    /// Ray exit together with the outward unit normal at the exit point
    /// (for polygons, the normal of the exit edge).
    pub fn ray_exit_with_normal(
        &self,
        x: Point,
        v: Point,
    ) -> Result<(f64, Point, Point), GeomError> {
        if v.norm() == 0.0 {
            return Err(GeomError::InvalidInput("ray direction must be nonzero".into()));
        }
        if self.gauge(x) >= 1.0 - 1e-12 {
            return Err(GeomError::NotInterior(x.x, x.y));
        }
        let (t, normal) = match &self.profile {
            Profile::Spectral => {
                // Exit time is the minimum halfplane crossing time over
                // normals with positive advance; the minimizing normal
                // supports the body at the exit point.
                let phi_v = v.y.atan2(v.x);
                let m = 192;
                let dt = std::f64::consts::PI / m as f64;
                let time = |theta: f64| {
                    let (h, _, _) = self.series.eval_with_derivs(theta);
                    let u = unit(theta);
                    (h - x.dot(&u)) / v.dot(&u)
                };
                let (mut best_t, mut best_th) = (f64::INFINITY, phi_v);
                for k in 0..m {
                    let th = phi_v - std::f64::consts::FRAC_PI_2 + (k as f64 + 0.5) * dt;
                    let t = time(th);
                    if t < best_t {
                        best_t = t;
                        best_th = th;
                    }
                }
                let (th_star, neg) =
                    maximize_scalar(&|th| -time(th), best_th - dt, best_th + dt, 1e-13);
                if -neg < best_t {
                    (-neg, unit(th_star))
                } else {
                    (best_t, unit(best_th))
                }
            }
            Profile::Ellipse { a, c } => {
                let y = x - c;
                let qa = (a * v).dot(&v);
                let qb = (a * v).dot(&y);
                let qc = (a * y).dot(&y) - 1.0;
                let t = (-qb + (qb * qb - qa * qc).sqrt()) / qa;
                let n = (a * (y + t * v)).normalize();
                (t, n)
            }
            Profile::Polygon { verts } => {
                let m = verts.len();
                let mut best = f64::INFINITY;
                let mut best_n = Point::zeros();
                for i in 0..m {
                    let (n_e, d_e) = edge_halfplane(verts[i], verts[(i + 1) % m]);
                    let adv = n_e.dot(&v);
                    if adv > 0.0 {
                        let t = (d_e - n_e.dot(&x)) / adv;
                        if t < best {
                            best = t;
                            best_n = n_e;
                        }
                    }
                }
                (best, best_n)
            }
            Profile::Lp { p, w, c } => {
                let psi = |t: f64| {
                    let y = x + t * v - c;
                    lp_norm(w[0] * y.x, w[1] * y.y, *p) - 1.0
                };
                let mut hi = self.max_h / v.norm();
                while psi(hi) < 0.0 {
                    hi *= 2.0;
                }
                let t = find_root(&psi, 0.0, hi, 1e-15).expect("exit bracket is valid");
                let y = x + t * v - c;
                let (t1, t2) = (w[0] * y.x, w[1] * y.y);
                let n = Point::new(
                    w[0] * t1.abs().powf(p - 1.0) * t1.signum(),
                    w[1] * t2.abs().powf(p - 1.0) * t2.signum(),
                )
                .normalize();
                (t, n)
            }
        };
        Ok((t, x + t * v, normal))
    }

    /// Far boundary crossing `(t, b)` of the chord `x0 + t dir`, `t > 0`,
    /// where `x0` lies on the boundary (or inside) and the chord passes
    /// through the interior.
    ///
    /// Along any line the gauge is convex, so beyond the interior dip
    /// there is exactly one forward crossing.
    pub fn chord_exit(&self, x0: Point, dir: Point) -> Result<(f64, Point), GeomError> {
        if dir.norm() == 0.0 {
            return Err(GeomError::InvalidInput("chord direction must be nonzero".into()));
        }
        if let Profile::Ellipse { a, c } = &self.profile {
            let y = x0 - c;
            let qa = (a * dir).dot(&dir);
            let qb = (a * dir).dot(&y);
            let qc = (a * y).dot(&y) - 1.0;
            let t = (-qb + (qb * qb - qa * qc).max(0.0).sqrt()) / qa;
            if !(t > 1e-12 * self.max_h / dir.norm()) {
                return Err(GeomError::Degenerate("chord does not enter the body".into()));
            }
            return Ok((t, x0 + t * dir));
        }
        let scale = 2.2 * self.max_h / dir.norm();
        let g = |t: f64| self.gauge(x0 + t * dir) - 1.0;
        let (t_dip, neg_dip) = maximize_scalar(&|t| -g(t), 0.0, scale, 1e-9);
        if !(-neg_dip < -1e-12) {
            return Err(GeomError::Degenerate("chord does not enter the body".into()));
        }
        let t = find_root(&g, t_dip, scale, 1e-14)
            .map_err(|e| GeomError::Degenerate(format!("chord exit bracket failed: {e}")))?;
        Ok((t, x0 + t * dir))
    }

    /// Normal angle of the supporting line touching at `x`, i.e. the
    /// maximizer of `<x, u(theta)> - h(theta)` in `[0, 2 pi)`.
    ///
    /// For `x` on the boundary of a strictly convex body this inverts
    /// the boundary parametrization; on a flat arc it returns a
    /// parameter of one supporting line through `x`.
    pub fn normal_parameter(&self, x: Point) -> f64 {
        match &self.profile {
            Profile::Ellipse { a, c } => {
                let n = a * (x - c);
                n.y.atan2(n.x).rem_euclid(TWO_PI)
            }
            Profile::Lp { p, w, c } if p.is_finite() && *p > 1.0 => {
                let y = x - c;
                let (t1, t2) = (w[0] * y.x, w[1] * y.y);
                let n = Point::new(
                    w[0] * t1.abs().powf(p - 1.0) * t1.signum(),
                    w[1] * t2.abs().powf(p - 1.0) * t2.signum(),
                );
                n.y.atan2(n.x).rem_euclid(TWO_PI)
            }
            _ => {
                let f = |theta: f64| x.dot(&unit(theta)) - self.support(theta);
                let (mut best_j, mut best) = (0_usize, f64::NEG_INFINITY);
                for j in 0..self.n {
                    let v = f(self.node(j));
                    if v > best {
                        best = v;
                        best_j = j;
                    }
                }
                let dt = TWO_PI / self.n as f64;
                let t0 = self.node(best_j);
                let (mut th, _) = maximize_scalar(&f, t0 - 1.5 * dt, t0 + 1.5 * dt, 1e-12);
                // Newton polish on f'(theta) = 0 sharpens the golden-section
                // abscissa to machine precision on smooth profiles.
                for _ in 0..4 {
                    let (_, hp, hpp) = self.support_with_derivs(th);
                    let fp = x.dot(&unit_perp(th)) - hp;
                    let fpp = -x.dot(&unit(th)) - hpp;
                    if fpp >= -1e-9 * self.max_h {
                        break;
                    }
                    let step = fp / fpp;
                    th -= step;
                    if step.abs() < 1e-14 {
                        break;
                    }
                }
                th.rem_euclid(TWO_PI)
            }
        }
    }

    /// Boundary parameters of the two tangent lines through an exterior
    /// point `z`, in increasing order in `[0, 2 pi)`.
    pub fn tangents_from_point(&self, z: Point) -> Result<(f64, f64), GeomError> {
        if self.gauge(z) <= 1.0 + 1e-12 {
            return Err(GeomError::NotExterior(z.x, z.y));
        }
        // F(theta) = <z, u> - h changes sign exactly at the two
        // tangency parameters for a convex body and exterior z.
        let f = |theta: f64| z.dot(&unit(theta)) - self.support(theta);
        let mut out = Vec::new();
        for j in 0..self.n {
            let t0 = TWO_PI * j as f64 / self.n as f64;
            let t1 = TWO_PI * (j + 1) as f64 / self.n as f64;
            let (f0, f1) = (f(t0), f(t1));
            if f0 == 0.0 {
                out.push(t0);
            } else if f0 * f1 < 0.0 {
                let r = find_root(&f, t0, t1, 1e-14).expect("bracketed");
                out.push(r);
            }
        }
        if out.len() != 2 {
            return Err(GeomError::Degenerate(format!(
                "expected 2 tangency parameters, found {}",
                out.len()
            )));
        }
        Ok((out[0], out[1]))
    }

    // ------------------------------------------------------------------
    // Integral quantities
    // ------------------------------------------------------------------

    /// Euclidean area.
    pub fn area(&self) -> f64 {
        match &self.profile {
            Profile::Spectral => {
                let dt = TWO_PI / self.n as f64;
                0.5 * dt
                    * (0..self.n)
                        .map(|j| self.h[j] * self.h[j] - self.hp[j] * self.hp[j])
                        .sum::<f64>()
            }
            Profile::Ellipse { a, .. } => std::f64::consts::PI / a.determinant().sqrt(),
            Profile::Polygon { verts } => {
                let m = verts.len();
                0.5 * (0..m)
                    .map(|i| cross2(verts[i], verts[(i + 1) % m]))
                    .sum::<f64>()
            }
            Profile::Lp { p, w, .. } => {
                let (p, w0, w1) = (*p, w[0], w[1]);
                // Area in polar form: the radial function is the
                // reciprocal gauge, closed-form for a centered lp ball.
                let f = move |phi: f64| {
                    let (s, c) = phi.sin_cos();
                    let g = lp_norm(w0 * c, w1 * s, p);
                    0.5 / (g * g)
                };
                4.0 * integrate_1d(&f, 0.0, std::f64::consts::FRAC_PI_2, &QuadratureSpec::default())
                    .expect("lp area quadrature converges")
                    .value
            }
        }
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        match &self.profile {
            Profile::Ellipse { c, .. } => *c,
            Profile::Lp { c, .. } => *c,
            Profile::Polygon { verts } => {
                let m = verts.len();
                let mut acc = Point::zeros();
                let mut area = 0.0;
                for i in 0..m {
                    let (p, q) = (verts[i], verts[(i + 1) % m]);
                    let w = cross2(p, q);
                    acc += (p + q) * w;
                    area += w;
                }
                acc / (3.0 * area)
            }
            Profile::Spectral => {
                let dt = TWO_PI / self.n as f64;
                let area = self.area();
                let (mut cx, mut cy) = (0.0, 0.0);
                for j in 0..self.n {
                    let th = self.node(j);
                    let (s, c) = th.sin_cos();
                    let bx = self.h[j] * c - self.hp[j] * s;
                    let by = self.h[j] * s + self.hp[j] * c;
                    let speed = self.h[j] + self.hpp[j];
                    // x' = speed * (-s, c)
                    cx += bx * bx * (speed * c);
                    cy -= by * by * (speed * -s);
                }
                Point::new(cx, cy) * dt / (2.0 * area)
            }
        }
    }

    // ------------------------------------------------------------------
    // Constructions
    // ------------------------------------------------------------------

    /// Translate by `d`; fails if the origin leaves the interior.
    pub fn translate(&self, d: Point) -> Result<Self, GeomError> {
        let h: Vec<f64> = (0..self.n)
            .map(|j| self.h[j] + d.dot(&self.units[j]))
            .collect();
        let profile = match &self.profile {
            Profile::Spectral => Profile::Spectral,
            Profile::Ellipse { a, c } => Profile::Ellipse { a: *a, c: c + d },
            Profile::Polygon { verts } => {
                Profile::Polygon { verts: verts.iter().map(|v| v + d).collect() }
            }
            Profile::Lp { p, w, c } => Profile::Lp { p: *p, w: *w, c: c + d },
        };
        Self::build(h, profile)
    }

    /// The homothety `q + s (K - q)` for `s > 0`; shrinks toward `q`
    /// when `s < 1`. Fails if the origin leaves the interior.
    pub fn shrink_toward(&self, q: Point, s: f64) -> Result<Self, GeomError> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(GeomError::InvalidInput(format!(
                "homothety ratio must be positive and finite, got {s}"
            )));
        }
        let h: Vec<f64> = (0..self.n)
            .map(|j| s * self.h[j] + (1.0 - s) * q.dot(&self.units[j]))
            .collect();
        let profile = match &self.profile {
            Profile::Spectral => Profile::Spectral,
            Profile::Ellipse { a, c } => {
                Profile::Ellipse { a: a / (s * s), c: q + s * (c - q) }
            }
            Profile::Polygon { verts } => Profile::Polygon {
                verts: verts.iter().map(|v| q + s * (v - q)).collect(),
            },
            Profile::Lp { p, w, c } => Profile::Lp {
                p: *p,
                w: [w[0] / s, w[1] / s],
                c: q + s * (c - q),
            },
        };
        Self::build(h, profile)
    }

    /// Polar body `K^o = { xi : <xi, x> <= 1 on K }`.
    pub fn polar_body(&self) -> Self {
        let profile = match &self.profile {
            Profile::Ellipse { a, c } => {
                let b = a.try_inverse().expect("SPD");
                let m = b - c * c.transpose();
                let mi = m.try_inverse().expect("origin interior keeps M SPD");
                let c_polar = -(mi * c);
                let denom = 1.0 + (mi * c).dot(c);
                Some(Profile::Ellipse { a: m / denom, c: c_polar })
            }
            Profile::Polygon { verts } => {
                let m = verts.len();
                let polar_verts: Vec<Point> = (0..m)
                    .map(|i| {
                        let (n_e, d_e) = edge_halfplane(verts[i], verts[(i + 1) % m]);
                        n_e / d_e
                    })
                    .collect();
                Some(Profile::Polygon { verts: polar_verts })
            }
            Profile::Lp { p, w, c } if c.norm() == 0.0 => {
                let q = p / (p - 1.0);
                Some(Profile::Lp { p: q, w: [1.0 / w[0], 1.0 / w[1]], c: *c })
            }
            _ => None,
        };
        match profile {
            Some(pr) => {
                let h = profile_support_table(&pr, self.n);
                Self::build(h, pr).expect("polar of valid body is valid")
            }
            None => {
                let h: Vec<f64> =
                    (0..self.n).map(|j| self.gauge(self.units[j])).collect();
                Self::build(h, Profile::Spectral).expect("polar of valid body is valid")
            }
        }
    }

    /// Dual body `K^z = (K - z)^o` at an interior point `z`.
    pub fn dual_body_at(&self, z: Point) -> Result<Self, GeomError> {
        if self.gauge(z) >= 1.0 - 1e-12 {
            return Err(GeomError::NotInterior(z.x, z.y));
        }
        Ok(self.translate(-z)?.polar_body())
    }

    /// Central symmetrization: support `(h(theta) + h(theta + pi)) / 2`.
    pub fn difference_body(&self) -> Self {
        let m = self.n / 2;
        let h: Vec<f64> = (0..self.n)
            .map(|j| 0.5 * (self.h[j] + self.h[(j + m) % self.n]))
            .collect();
        let profile = match &self.profile {
            Profile::Ellipse { a, .. } => Some(Profile::Ellipse { a: *a, c: Point::zeros() }),
            Profile::Lp { p, w, .. } => Some(Profile::Lp { p: *p, w: *w, c: Point::zeros() }),
            Profile::Polygon { verts } => Some(Profile::Polygon {
                verts: minkowski_average_with_reflection(verts),
            }),
            Profile::Spectral => None,
        };
        match profile {
            Some(pr) => {
                let h = profile_support_table(&pr, self.n);
                Self::build(h, pr).expect("difference body is valid")
            }
            None => Self::build(h, Profile::Spectral).expect("difference body is valid"),
        }
    }

    /// Area of the dual body `(K - z)^o` at an interior point `z`,
    /// without constructing the dual body.
    ///
    /// Ellipses and polygons use closed forms. Other profiles integrate
    /// half the squared dual radial function `1 / (h(t) - <z, u(t)>)`
    /// over the support table, switching to adaptive quadrature when
    /// `z` sits too close to the boundary for the node spacing to
    /// resolve the integrand peak.
    pub fn dual_area_at(&self, z: Point) -> Result<f64, GeomError> {
        // The gauge enters only through interior checks, so a node-scan
        // certificate skips the refined maximization on the hot path.
        let g = if self.certainly_deep_interior(z) { 0.9 } else { self.gauge(z) };
        if g >= 1.0 - 1e-12 {
            return Err(GeomError::NotInterior(z.x, z.y));
        }
        match &self.profile {
            Profile::Ellipse { a, c } => {
                let d = z - c;
                let q = (a * d).dot(&d);
                Ok(std::f64::consts::PI * a.determinant().sqrt() / ((1.0 - q) * (1.0 - q).sqrt()))
            }
            Profile::Polygon { verts } => {
                let m = verts.len();
                let w: Vec<Point> = (0..m)
                    .map(|i| {
                        let (n_e, d_e) = edge_halfplane(verts[i], verts[(i + 1) % m]);
                        n_e / (d_e - n_e.dot(&z))
                    })
                    .collect();
                Ok(0.5 * (0..m).map(|i| cross2(w[i], w[(i + 1) % m])).sum::<f64>())
            }
            _ => {
                if 1.0 - g > 0.05 {
                    let dt = TWO_PI / self.n as f64;
                    let mut acc = 0.0;
                    for j in 0..self.n {
                        let denom = self.h[j] - z.dot(&self.units[j]);
                        acc += 1.0 / (denom * denom);
                    }
                    Ok(0.5 * dt * acc)
                } else {
                    let f = |t: f64| {
                        let denom = self.support(t) - z.dot(&unit(t));
                        0.5 / (denom * denom)
                    };
                    let spec = QuadratureSpec {
                        abs_tol: 1e-14,
                        rel_tol: 1e-10,
                        max_subdivisions: 4096,
                    };
                    integrate_1d(&f, 0.0, TWO_PI, &spec).map(|r| r.value).map_err(|e| {
                        GeomError::InvalidInput(format!("dual area quadrature failed: {e}"))
                    })
                }
            }
        }
    }

    /// Area of the central symmetral `(D + (-D)) / 2` of the dual body
    /// `D = (K - z)^o`.
    ///
    /// An ellipse dual is an ellipse, so symmetrization keeps its area.
    /// Polygon profiles go through the explicit dual polygon. Smooth
    /// profiles avoid the full polar refit: the dual support values
    /// come from a rotating maximum over the dual radial table, and the
    /// area from the Parseval identity.
    pub fn symmetral_dual_area_at(&self, z: Point) -> Result<f64, GeomError> {
        match &self.profile {
            Profile::Ellipse { .. } => self.dual_area_at(z),
            Profile::Polygon { .. } => {
                Ok(self.dual_body_at(z)?.difference_body().area())
            }
            Profile::Lp { .. } | Profile::Spectral => {
                if !self.certainly_deep_interior(z) && self.gauge(z) >= 1.0 - 1e-12 {
                    return Err(GeomError::NotInterior(z.x, z.y));
                }
                let r: Vec<f64> = (0..self.n)
                    .map(|j| 1.0 / (self.h[j] - z.dot(&self.units[j])))
                    .collect();
                let cos_tab: Vec<f64> = self.units.iter().map(|u| u.x).collect();
                let hd = rotating_support_from_radial(&r, &cos_tab);
                let m = self.n / 2;
                let hs: Vec<f64> =
                    (0..self.n).map(|k| 0.5 * (hd[k] + hd[(k + m) % self.n])).collect();
                Ok(TrigSeries::fit(&hs).enclosed_area())
            }
        }
    }

    /// Image under a projective map, refitted as a support body from
    /// mapped boundary points. Fails if the body meets the line sent to
    /// infinity.
    pub fn apply_projective(&self, g: &ProjectiveMap) -> Result<Self, GeomError> {
        let g = g.oriented_for(self.centroid())?;
        match &self.profile {
            Profile::Ellipse { a, c } => {
                let s = super::conic::Conic::from_ellipse(*a, *c).matrix();
                let gi = g.matrix().try_inverse().ok_or_else(|| {
                    GeomError::Degenerate("projective map is singular".into())
                })?;
                let s_new = gi.transpose() * s * gi;
                let (a_new, c_new) = super::conic::extract_ellipse(&s_new)
                    .ok_or(GeomError::ChartViolation)?;
                // Chart check on the mapped boundary.
                for j in 0..self.n {
                    g.apply_point_in_chart(self.boundary_point(self.node(j)))?;
                }
                if (a_new * c_new).dot(&c_new) >= 1.0 {
                    return Err(GeomError::InvalidInput(
                        "projective image does not contain the origin; recenter first".into(),
                    ));
                }
                let pr = Profile::Ellipse { a: a_new, c: c_new };
                let h = profile_support_table(&pr, self.n);
                Self::build(h, pr)
            }
            Profile::Polygon { verts } => {
                let mapped: Result<Vec<Point>, GeomError> =
                    verts.iter().map(|v| g.apply_point_in_chart(*v)).collect();
                Self::polygon(&mapped?)
            }
            _ => {
                // Continuous support refit of the mapped boundary curve.
                let m = 2 * self.n;
                let ys: Vec<Point> = (0..m)
                    .map(|k| {
                        g.apply_point_in_chart(self.boundary_point(TWO_PI * k as f64 / m as f64))
                    })
                    .collect::<Result<_, _>>()?;
                let dt = TWO_PI / m as f64;
                let value = |theta: f64, phi_u: Point| {
                    g.apply_point_in_chart(self.boundary_point(theta))
                        .map(|y| y.dot(&phi_u))
                        .unwrap_or(f64::NEG_INFINITY)
                };
                let mut h = vec![0.0; self.n];
                let mut ptr = 0_usize;
                for (j, slot) in h.iter_mut().enumerate() {
                    let u = unit(TWO_PI * j as f64 / self.n as f64);
                    if j == 0 {
                        let (best, _) = (0..m)
                            .map(|k| (k, ys[k].dot(&u)))
                            .fold((0, f64::NEG_INFINITY), |acc, it| {
                                if it.1 > acc.1 {
                                    it
                                } else {
                                    acc
                                }
                            });
                        ptr = best;
                    } else {
                        // The argmax rotates monotonically with the
                        // normal; advance until the value stops rising.
                        loop {
                            let next = (ptr + 1) % m;
                            if ys[next].dot(&u) > ys[ptr].dot(&u) {
                                ptr = next;
                            } else {
                                break;
                            }
                        }
                    }
                    let t0 = dt * ptr as f64;
                    let (_, fmax) = maximize_scalar(
                        &|t| value(t, u),
                        t0 - 1.5 * dt,
                        t0 + 1.5 * dt,
                        1e-13,
                    );
                    *slot = fmax.max(ys[ptr].dot(&u));
                }
                Self::build(h, Profile::Spectral)
            }
        }
    }
}

// ----------------------------------------------------------------------
// Profile helpers
// ----------------------------------------------------------------------

fn lp_norm(x: f64, y: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return x.abs().max(y.abs());
    }
    let (ax, ay) = (x.abs(), y.abs());
    let m = ax.max(ay);
    if m == 0.0 {
        return 0.0;
    }
    m * ((ax / m).powf(p) + (ay / m).powf(p)).powf(1.0 / p)
}

fn edge_halfplane(a: Point, b: Point) -> (Point, f64) {
    let e = b - a;
    let n_e = Point::new(e.y, -e.x).normalize();
    (n_e, n_e.dot(&a))
}

fn profile_support_table(p: &Profile, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| profile_support_derivs(p, TWO_PI * j as f64 / n as f64).0)
        .collect()
}

// Support function value and first two derivatives for closed-form
// profiles; for polygons the one-sided (almost-everywhere) values.
fn profile_support_derivs(p: &Profile, theta: f64) -> (f64, f64, f64) {
    let u = unit(theta);
    let up = unit_perp(theta);
    match p {
        Profile::Spectral => unreachable!("spectral bodies evaluate through their series"),
        Profile::Ellipse { a, c } => {
            let b = a.try_inverse().expect("SPD");
            let g2 = (b * u).dot(&u);
            let g = g2.sqrt();
            let q = (b * u).dot(&up);
            let h = c.dot(&u) + g;
            let hp = c.dot(&up) + q / g;
            // Centered part satisfies g + g'' = det(B) / g^3.
            let hpp = b.determinant() / (g2 * g) - g - c.dot(&u);
            (h, hp, hpp)
        }
        Profile::Polygon { verts } => {
            let (mut best_v, mut best) = (verts[0], f64::NEG_INFINITY);
            for v in verts {
                let val = v.dot(&u);
                if val > best {
                    best = val;
                    best_v = *v;
                }
            }
            (best, best_v.dot(&up), -best)
        }
        Profile::Lp { p, w, c } => {
            let q = p / (p - 1.0);
            let mut th = theta;
            // Nudge off the axes where |t|^{q-2} is singular for q < 2.
            for k in 0..4 {
                let axis = k as f64 * std::f64::consts::FRAC_PI_2;
                if ((th - axis).rem_euclid(TWO_PI)).abs() < 1e-9
                    || ((th - axis).rem_euclid(TWO_PI) - TWO_PI).abs() < 1e-9
                {
                    th += 1e-9;
                }
            }
            let (s, co) = th.sin_cos();
            let (t1, t2) = (co / w[0], s / w[1]);
            let (d1, d2) = (-s / w[0], co / w[1]);
            let (a1, a2) = (t1.abs(), t2.abs());
            let big_a = a1.powf(q) + a2.powf(q);
            let ap = q * (a1.powf(q - 1.0) * t1.signum() * d1
                + a2.powf(q - 1.0) * t2.signum() * d2);
            let app = q * (q - 1.0) * (a1.powf(q - 2.0) * d1 * d1 + a2.powf(q - 2.0) * d2 * d2)
                - q * big_a;
            let inv_q = 1.0 / q;
            let h0 = big_a.powf(inv_q);
            let hp0 = inv_q * big_a.powf(inv_q - 1.0) * ap;
            let hpp0 = inv_q * (inv_q - 1.0) * big_a.powf(inv_q - 2.0) * ap * ap
                + inv_q * big_a.powf(inv_q - 1.0) * app;
            (h0 + c.dot(&u), hp0 + c.dot(&up), hpp0 - c.dot(&u))
        }
    }
}

// Support values, at the sample angles, of the convex body whose
// radial function is tabulated by `r` on the same uniform grid: a
// rotating maximum of `r(psi) cos(phi - psi)` exploiting that the
// maximizing `psi` is nondecreasing in `phi`, refined by a parabola
// through the three neighboring table values.
fn rotating_support_from_radial(r: &[f64], cos_tab: &[f64]) -> Vec<f64> {
    let n = r.len() as i64;
    let g = |k: i64, j: i64| {
        r[j.rem_euclid(n) as usize] * cos_tab[(k - j).rem_euclid(n) as usize]
    };
    let mut jstar: i64 = (0..n).max_by(|&a, &b| g(0, a).total_cmp(&g(0, b))).unwrap();
    let mut out = vec![0.0; n as usize];
    for k in 0..n {
        let mut steps = 0;
        while g(k, jstar + 1) > g(k, jstar) && steps < n {
            jstar += 1;
            steps += 1;
        }
        let (gm, g0, gp) = (g(k, jstar - 1), g(k, jstar), g(k, jstar + 1));
        let curv = gm - 2.0 * g0 + gp;
        out[k as usize] = if curv < 0.0 {
            let delta = 0.5 * (gm - gp) / curv;
            g0 - 0.25 * (gm - gp) * delta
        } else {
            g0
        };
    }
    out
}

// Minkowski average of a polygon with its reflection: edges of P/2 and
// -P/2 merged in normal-angle order, parallel edges fused.
fn minkowski_average_with_reflection(verts: &[Point]) -> Vec<Point> {
    let m = verts.len();
    let mut edges: Vec<(f64, Point)> = Vec::with_capacity(2 * m);
    for i in 0..m {
        let e = (verts[(i + 1) % m] - verts[i]) * 0.5;
        edges.push((e.y.atan2(e.x), e));
        let r = -e;
        edges.push((r.y.atan2(r.x), r));
    }
    edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut fused: Vec<Point> = Vec::with_capacity(edges.len());
    for (ang, e) in edges {
        match fused.last_mut() {
            Some(last) if (ang - last.y.atan2(last.x)).abs() < 1e-12 => *last += e,
            _ => fused.push(e),
        }
    }
    let mut pts = Vec::with_capacity(fused.len());
    let mut cur = Point::zeros();
    for e in &fused {
        pts.push(cur);
        cur += *e;
    }
    // The edge multiset is symmetric under negation, so the chain is a
    // centrally symmetric polygon; its vertex mean is its center.
    let c = pts.iter().sum::<Point>() / pts.len() as f64;
    pts.iter().map(|p| p - c).collect()
}
