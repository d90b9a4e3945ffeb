//! Billiards in a convex table whose chord lengths are measured by the
//! Funk metric of a surrounding body: reflection law, orbit iteration,
//! periodic orbits, dual billiards, and conic caustics for circular
//! surroundings.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};
use serde::Serialize;

use crate::funk::{FunkContext, MetricKind};
use crate::geom::{harmonic_residual, unit, Conic, GeomError, Point, SupportBody2};
use crate::numerics::{cyclic_ascent, find_root};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PI: f64 = std::f64::consts::PI;

/// One bounce of a billiard trajectory: `q` is the boundary parameter
/// (outward normal angle) of the bounce point on the table, `p` the
/// boundary parameter on the surrounding body where the outgoing ray
/// exits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BounceState {
    pub q: f64,
    pub p: f64,
}

/// A billiard trajectory: bounce states in temporal order, the Funk
/// length of each segment, and diagnostics.
///
/// For closed orbits there are as many segments as states (the last
/// one returns to the first state) and `rotation` holds the winding
/// number of the bounce parameters around the table.
#[derive(Debug, Clone, Serialize)]
pub struct BilliardOrbit {
    pub states: Vec<BounceState>,
    pub segment_lengths: Vec<f64>,
    pub closed: bool,
    pub rotation: Option<usize>,
    /// Largest stationarity residual of the reflection law over the
    /// bounces where both neighbors are known.
    pub max_residual: f64,
}

impl BilliardOrbit {
    /// Total Funk length of the trajectory.
    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }
}

/// Conic caustics of an orbit in an ellipse table inside the unit
/// circle, together with their consistency diagnostics.
#[derive(Debug, Clone)]
pub struct CausticData {
    /// Conic through the intersections of consecutive exit tangents.
    pub outer: Conic,
    /// Conic tangent to every orbit segment.
    pub inner: Conic,
    /// Mean pencil parameter of the tangent intersections.
    pub pencil_t: f64,
    /// Largest deviation of an intersection's pencil parameter from the
    /// mean.
    pub pencil_spread: f64,
    /// Frobenius distance between the fitted outer conic and the pencil
    /// member at the mean parameter.
    pub pencil_residual: f64,
    /// Largest tangency residual of an orbit segment against the inner
    /// conic.
    pub tangency_residual: f64,
    /// Harmonicity residual of the quadruple (inner, table, circle,
    /// outer).
    pub harmonic_residual: f64,
}

/// A billiard table inside a surrounding convex body whose Funk metric
/// measures the chords.
#[derive(Debug, Clone)]
pub struct Billiard {
    table: SupportBody2,
    metric: FunkContext,
}

impl Billiard {
    /// Pairs a table with a surrounding body; the table must lie
    /// strictly inside it.
    pub fn new(table: SupportBody2, ambient: SupportBody2) -> Result<Self, GeomError> {
        let mut worst = 0.0_f64;
        for j in 0..table.sample_count() {
            worst = worst.max(ambient.gauge(table.boundary_point(table.node(j))));
        }
        if !(worst < 1.0 - 1e-9) {
            return Err(GeomError::InvalidInput(format!(
                "table must lie strictly inside the surrounding body (max gauge {worst:.6})"
            )));
        }
        Ok(Billiard { table, metric: FunkContext::new(ambient) })
    }

    /// The table.
    pub fn table(&self) -> &SupportBody2 {
        &self.table
    }

    /// The surrounding body.
    pub fn ambient(&self) -> &SupportBody2 {
        self.metric.body()
    }

    /// The Funk metric context of the surrounding body.
    pub fn metric(&self) -> &FunkContext {
        &self.metric
    }

    /// Builds the bounce state at table parameter `q` whose outgoing
    /// ray points along `dir`. The ray must traverse the table
    /// interior.
    pub fn initial_state(&self, q: f64, dir: Point) -> Result<BounceState, GeomError> {
        let x0 = self.table.boundary_point(q);
        self.table.chord_exit(x0, dir)?;
        let (_, _, n) = self.ambient().ray_exit_with_normal(x0, dir)?;
        Ok(BounceState { q: q.rem_euclid(TWO_PI), p: n.y.atan2(n.x).rem_euclid(TWO_PI) })
    }

    /// One reflection: extends the incoming ray to the next bounce
    /// point, pivots the exit tangent line around the intersection of
    /// the two tangents, and returns the outgoing state.
    ///
    /// Consecutive tangents of the surrounding body meet at the pivot;
    /// the bounce tangent of the table passes through it as well, which
    /// is the geometric form of the reflection law.
    pub fn reflect(&self, s: BounceState) -> Result<BounceState, GeomError> {
        if !self.table.is_strictly_convex() {
            return Err(GeomError::CurvatureUnavailable);
        }
        let x0 = self.table.boundary_point(s.q);
        let b0 = self.ambient().boundary_point(s.p);
        let dir = b0 - x0;
        if dir.norm() < 1e-13 {
            return Err(GeomError::Degenerate(
                "ray exit coincides with the bounce point".into(),
            ));
        }
        let (_, x1) = self.table.chord_exit(x0, dir)?;
        let q1 = self.table.normal_parameter(x1);
        let pivot = self.table.tangent_line_hom(q1).cross(&self.ambient().tangent_line_hom(s.p));
        let p1 = other_tangent_param(self.ambient(), pivot, s.p)?;
        Ok(BounceState { q: q1, p: p1 })
    }

    /// One reflection through the variational law: the outgoing exit
    /// parameter is the root of the tangential stationarity condition
    /// for the Funk length of the broken path, solved by bracketed
    /// bisection seeded at the geometric answer.
    pub fn variational_reflect(&self, s: BounceState) -> Result<BounceState, GeomError> {
        let geo = self.reflect(s)?;
        let x0 = self.table.boundary_point(s.q);
        let x1 = self.table.boundary_point(geo.q);
        let b1 = self.ambient().boundary_point(s.p);
        let n1 = unit(s.p);
        let e1 = (x1 - x0).normalize();
        let r1 = (b1 - x1).norm();
        let tau = self.table.boundary_velocity(geo.q).normalize();
        let incoming = n1.dot(&tau) / (r1 * n1.dot(&e1));
        let ambient = self.ambient();
        let resid = |phi: f64| {
            let d = ambient.boundary_point(phi) - x1;
            let s2 = d.norm();
            let n2 = unit(phi);
            incoming - n2.dot(&tau) / (s2 * n2.dot(&(d / s2)))
        };
        let mut half = 0.35;
        while half <= 1.5 {
            let (a, b) = (geo.p - half, geo.p + half);
            if resid(a) * resid(b) < 0.0 {
                let phi = find_root(&resid, a, b, 1e-12)
                    .map_err(|e| GeomError::Degenerate(format!("stationarity root: {e}")))?;
                return Ok(BounceState { q: geo.q, p: phi.rem_euclid(TWO_PI) });
            }
            half *= 2.0;
        }
        Err(GeomError::Degenerate("no stationary outgoing direction found".into()))
    }

    /// Tangential derivative of the broken-path Funk length at the
    /// bounce point `q`, given its neighbors; zero at a true
    /// reflection.
    pub fn reflection_residual(
        &self,
        x_prev: Point,
        q: f64,
        x_next: Point,
    ) -> Result<f64, GeomError> {
        let x = self.table.boundary_point(q);
        let tau = self.table.boundary_velocity(q).normalize();
        let grad = self.metric.funk_distance_grad_y(x_prev, x)?
            + self.metric.funk_distance_grad_x(x, x_next)?;
        Ok(grad.dot(&tau))
    }

    /// Iterates the reflection law, recording `bounces` states and the
    /// Funk length of each segment.
    pub fn orbit(&self, initial: BounceState, bounces: usize) -> Result<BilliardOrbit, GeomError> {
        if bounces < 2 {
            return Err(GeomError::InvalidInput("an orbit needs at least 2 bounces".into()));
        }
        let mut states = Vec::with_capacity(bounces);
        states.push(BounceState {
            q: initial.q.rem_euclid(TWO_PI),
            p: initial.p.rem_euclid(TWO_PI),
        });
        for _ in 1..bounces {
            let next = self.reflect(*states.last().expect("nonempty"))?;
            states.push(next);
        }
        self.assemble(states, false)
    }

    /// Finds the longest closed orbit with `m` bounces winding `k`
    /// times around the table by multistart coordinate ascent on the
    /// total Funk length, then polishes it with a damped Newton
    /// iteration on the stationarity system.
    pub fn periodic_orbit(&self, m: usize, k: usize) -> Result<BilliardOrbit, GeomError> {
        if m < 2 || k == 0 || k >= m || gcd(m, k) != 1 {
            return Err(GeomError::InvalidInput(format!(
                "period {m} and winding {k} must satisfy 1 <= k < m with gcd(m, k) = 1"
            )));
        }
        if !self.table.is_strictly_convex() {
            return Err(GeomError::CurvatureUnavailable);
        }
        let objective = |q: &[f64]| -> f64 {
            let mut total = 0.0;
            for i in 0..m {
                let a = self.table.boundary_point(q[i]);
                let b = self.table.boundary_point(q[(i + 1) % m]);
                match self.metric.distance(MetricKind::Funk, a, b) {
                    Ok(d) => total += d,
                    Err(_) => return f64::NEG_INFINITY,
                }
            }
            total
        };
        let radius = vec![PI / m as f64; m];
        let mut best: Option<(Vec<f64>, f64, f64)> = None;
        for start in 0..8 {
            let offset = TWO_PI * start as f64 / 8.0;
            let mut q: Vec<f64> =
                (0..m).map(|i| offset + TWO_PI * (k * i) as f64 / m as f64).collect();
            cyclic_ascent(&objective, &mut q, &radius, 1e-11, 1e-14, 40);
            let resid = self.polish_periodic(&mut q);
            if !resid.is_finite() {
                continue;
            }
            let canon = canonical_cycle(&q);
            if winding(&canon) != k {
                continue;
            }
            let len = objective(&canon);
            let replace = match &best {
                None => true,
                Some((bq, blen, bresid)) => {
                    if len > blen + 1e-9 {
                        true
                    } else if len < blen - 1e-9 {
                        false
                    } else if resid < bresid - 1e-14 {
                        true
                    } else if resid > bresid + 1e-14 {
                        false
                    } else {
                        canon < *bq
                    }
                }
            };
            if replace {
                best = Some((canon, len, resid));
            }
        }
        let (q, _, resid) = best.ok_or_else(|| {
            GeomError::Degenerate(format!(
                "no closed orbit found in rotation class ({m}, {k})"
            ))
        })?;
        if resid > 1e-8 {
            return Err(GeomError::Degenerate(format!(
                "periodic orbit search stalled at stationarity residual {resid:.3e}"
            )));
        }
        let pts: Vec<Point> = q.iter().map(|&t| self.table.boundary_point(t)).collect();
        let mut states = Vec::with_capacity(m);
        for i in 0..m {
            let dir = pts[(i + 1) % m] - pts[i];
            let (_, _, n) = self.ambient().ray_exit_with_normal(pts[i], dir)?;
            states.push(BounceState { q: q[i], p: n.y.atan2(n.x).rem_euclid(TWO_PI) });
        }
        self.assemble(states, true)
    }

    /// The dual trajectory: exit tangent lines, read as boundary points
    /// of the polar of the surrounding body around the table centroid,
    /// traversed in reversed order, form a billiard orbit in the dual
    /// pair (polar of the surrounding body inside polar of the table).
    ///
    /// Returns the dual billiard and the dual orbit; the dual orbit's
    /// residual and lengths are recomputed from scratch in the dual
    /// pair, so they genuinely verify the duality rather than restate
    /// it.
    pub fn dual(&self, orbit: &BilliardOrbit) -> Result<(Billiard, BilliardOrbit), GeomError> {
        self.dual_with_anchor(orbit, self.table.centroid())
    }

    /// Same as [`Billiard::dual`] with an explicit polarity anchor
    /// (interior to the table).
    pub fn dual_with_anchor(
        &self,
        orbit: &BilliardOrbit,
        anchor: Point,
    ) -> Result<(Billiard, BilliardOrbit), GeomError> {
        if !orbit.closed {
            return Err(GeomError::InvalidInput(
                "dual trajectories are defined for closed orbits".into(),
            ));
        }
        if orbit.max_residual > 1e-6 {
            return Err(GeomError::Degenerate(format!(
                "orbit stationarity residual {:.3e} is too large to dualize",
                orbit.max_residual
            )));
        }
        let dual_table = self.ambient().dual_body_at(anchor)?;
        let dual_ambient = self.table.dual_body_at(anchor)?;
        let dual = Billiard::new(dual_table, dual_ambient)?;
        let mut xs: Vec<Point> = Vec::with_capacity(orbit.states.len());
        for s in orbit.states.iter().rev() {
            let u = unit(s.p);
            let denom = self.ambient().support(s.p) - anchor.dot(&u);
            if !(denom > 0.0) {
                return Err(GeomError::NotInterior(anchor.x, anchor.y));
            }
            xs.push(u / denom);
        }
        let m = xs.len();
        let mut states = Vec::with_capacity(m);
        for i in 0..m {
            let q = dual.table.normal_parameter(xs[i]);
            let dir = xs[(i + 1) % m] - xs[i];
            let (_, _, n) = dual.ambient().ray_exit_with_normal(xs[i], dir)?;
            states.push(BounceState { q, p: n.y.atan2(n.x).rem_euclid(TWO_PI) });
        }
        let dual_orbit = dual.assemble(states, true)?;
        Ok((dual, dual_orbit))
    }

    /// Segment lengths, stationarity residuals, and winding for a state
    /// sequence.
    fn assemble(&self, states: Vec<BounceState>, closed: bool) -> Result<BilliardOrbit, GeomError> {
        let pts: Vec<Point> = states.iter().map(|s| self.table.boundary_point(s.q)).collect();
        let m = pts.len();
        let pairs = if closed { m } else { m - 1 };
        let mut segment_lengths = Vec::with_capacity(pairs);
        for j in 0..pairs {
            segment_lengths.push(self.metric.distance(
                MetricKind::Funk,
                pts[j],
                pts[(j + 1) % m],
            )?);
        }
        let mut max_residual = 0.0_f64;
        let interior: Vec<usize> =
            if closed { (0..m).collect() } else { (1..m.saturating_sub(1)).collect() };
        for j in interior {
            let r = self.reflection_residual(
                pts[(j + m - 1) % m],
                states[j].q,
                pts[(j + 1) % m],
            )?;
            max_residual = max_residual.max(r.abs());
        }
        let rotation = if closed {
            let q: Vec<f64> = states.iter().map(|s| s.q).collect();
            Some(winding(&q))
        } else {
            None
        };
        Ok(BilliardOrbit { states, segment_lengths, closed, rotation, max_residual })
    }

    /// Stationarity residual vector of a closed bounce-parameter cycle.
    fn periodic_residuals(&self, q: &[f64]) -> Result<DVector<f64>, GeomError> {
        let m = q.len();
        let pts: Vec<Point> = q.iter().map(|&t| self.table.boundary_point(t)).collect();
        let mut r = DVector::zeros(m);
        for i in 0..m {
            r[i] = self.reflection_residual(pts[(i + m - 1) % m], q[i], pts[(i + 1) % m])?;
        }
        Ok(r)
    }

    /// Damped Newton iteration on the stationarity system with a
    /// finite-difference Jacobian; returns the final residual norm.
    fn polish_periodic(&self, q: &mut [f64]) -> f64 {
        let m = q.len();
        let mut cur = match self.periodic_residuals(q) {
            Ok(r) => r,
            Err(_) => return f64::INFINITY,
        };
        let mut best_norm = cur.amax();
        for _ in 0..30 {
            if best_norm < 1e-12 {
                break;
            }
            let h = 1e-7;
            let mut jac = DMatrix::zeros(m, m);
            let mut ok = true;
            for j in 0..m {
                let mut qp = q.to_vec();
                let mut qm = q.to_vec();
                qp[j] += h;
                qm[j] -= h;
                match (self.periodic_residuals(&qp), self.periodic_residuals(&qm)) {
                    (Ok(rp), Ok(rm)) => {
                        for i in 0..m {
                            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
                        }
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            let Some(delta) = jac.lu().solve(&cur) else { break };
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..8 {
                let cand: Vec<f64> = (0..m).map(|i| q[i] - lambda * delta[i]).collect();
                if let Ok(r) = self.periodic_residuals(&cand) {
                    if r.amax() < best_norm {
                        q.copy_from_slice(&cand);
                        cur = r;
                        best_norm = cur.amax();
                        improved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best_norm
    }
}

/// Pencil parameter of a point for the pencil spanned by the ellipse
/// `{<A q, q> <= 1}` and the unit circle: `(<A z, z> - 1) / (1 - |z|^2)`.
///
/// Undefined on the unit circle.
pub fn pencil_parameter(a: &Matrix2<f64>, z: Point) -> Result<f64, GeomError> {
    let denom = 1.0 - z.norm_squared();
    if denom.abs() < 1e-10 * (1.0 + z.norm_squared()) {
        return Err(GeomError::Degenerate(
            "pencil parameter is undefined on the unit circle".into(),
        ));
    }
    Ok(((a * z).dot(&z) - 1.0) / denom)
}

/// Fits the caustic pair of an orbit in the ellipse table
/// `{<A q, q> <= 1}` inside the unit circle.
///
/// The outer conic is fitted through the intersections of consecutive
/// exit tangents and checked against the linear pencil of the table and
/// the circle; the inner conic is derived from it and checked for
/// tangency to every segment and for harmonicity of the quadruple.
pub fn caustics(a: &Matrix2<f64>, orbit: &BilliardOrbit) -> Result<CausticData, GeomError> {
    if (a[(0, 1)] - a[(1, 0)]).abs() > 1e-12 * a.norm() {
        return Err(GeomError::InvalidInput("table matrix must be symmetric".into()));
    }
    if !(a[(0, 0)] > 0.0 && a.determinant() > 0.0) {
        return Err(GeomError::InvalidInput("table matrix must be positive definite".into()));
    }
    let am1 = a - Matrix2::identity();
    if !(am1[(0, 0)] > 0.0 && am1.determinant() > 0.0) {
        return Err(GeomError::InvalidInput(
            "table must lie strictly inside the unit circle".into(),
        ));
    }
    let m = orbit.states.len();
    if m < 6 {
        return Err(GeomError::InvalidInput("caustic fits need at least 6 bounces".into()));
    }
    let pairs = if orbit.closed { m } else { m - 1 };
    let mut zs = Vec::new();
    let mut ts = Vec::new();
    for j in 0..pairs {
        let p0 = orbit.states[j].p;
        let p1 = orbit.states[(j + 1) % m].p;
        let l0 = Vector3::new(p0.cos(), p0.sin(), -1.0);
        let l1 = Vector3::new(p1.cos(), p1.sin(), -1.0);
        let z = l0.cross(&l1);
        let dn = (z.x * z.x + z.y * z.y).sqrt();
        if z.z.abs() < 1e-10 * dn {
            // Parallel consecutive tangents meet at infinity; such
            // intersections are excluded from the affine fit.
            continue;
        }
        let za = Point::new(z.x / z.z, z.y / z.z);
        ts.push(pencil_parameter(a, za)?);
        zs.push(za);
    }
    if zs.len() < 5 {
        return Err(GeomError::Degenerate(
            "too few finite tangent intersections for a conic fit".into(),
        ));
    }
    let t_mean = ts.iter().sum::<f64>() / ts.len() as f64;
    let pencil_spread = ts.iter().map(|t| (t - t_mean).abs()).fold(0.0, f64::max);
    let outer = Conic::fit(&zs)?;
    let table_conic = Conic::from_ellipse(*a, Point::zeros());
    let circle = Conic::new(Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0)))?;
    let member = Conic::new(table_conic.matrix() + t_mean * circle.matrix())?;
    let pencil_residual = outer.frobenius_distance(&member);
    let mi = circle.inverse_matrix()? * outer.matrix() * table_conic.inverse_matrix()?;
    let mi = 0.5 * (mi + mi.transpose());
    let inner_matrix = mi
        .try_inverse()
        .ok_or_else(|| GeomError::Degenerate("inner caustic matrix is singular".into()))?;
    let inner = Conic::new(inner_matrix)?;
    let table = SupportBody2::ellipse(*a, Point::zeros())?;
    let pts: Vec<Point> = orbit.states.iter().map(|s| table.boundary_point(s.q)).collect();
    let mut tangency = 0.0_f64;
    for j in 0..pairs {
        let w = Vector3::new(pts[j].x, pts[j].y, 1.0)
            .cross(&Vector3::new(pts[(j + 1) % m].x, pts[(j + 1) % m].y, 1.0));
        tangency = tangency.max(inner.tangency_residual(w)?);
    }
    let harmonic = harmonic_residual(&inner, &table_conic, &circle, &outer)?;
    Ok(CausticData {
        outer,
        inner,
        pencil_t: t_mean,
        pencil_spread,
        pencil_residual,
        tangency_residual: tangency,
        harmonic_residual: harmonic,
    })
}

/// The parameter of the second tangent line to `body` through the
/// pivot (homogeneous), given that one tangency parameter is `p0`.
fn other_tangent_param(
    body: &SupportBody2,
    pivot: Vector3<f64>,
    p0: f64,
) -> Result<f64, GeomError> {
    let dir_norm = (pivot.x * pivot.x + pivot.y * pivot.y).sqrt();
    if dir_norm == 0.0 {
        return Err(GeomError::Degenerate("tangent lines coincide".into()));
    }
    if pivot.z.abs() < 1e-12 * dir_norm {
        // The tangents meet at infinity; the other tangent with the
        // same direction touches at the antipodal parameter.
        return Ok((p0 + PI).rem_euclid(TWO_PI));
    }
    let za = Point::new(pivot.x / pivot.z, pivot.y / pivot.z);
    let (t1, t2) = body.tangents_from_point(za)?;
    let (d1, d2) = (circ_dist(t1, p0), circ_dist(t2, p0));
    let (near, far) = if d1 <= d2 { (d1, t2) } else { (d2, t1) };
    if near > 1e-5 {
        return Err(GeomError::Degenerate(format!(
            "tangent pivot lost the incoming tangency parameter (offset {near:.2e})"
        )));
    }
    Ok(far)
}

/// Circular distance between two angles.
fn circ_dist(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TWO_PI) - PI).abs()
}

/// Wraps each parameter to `[0, 2 pi)` and rotates the cycle so the
/// smallest parameter comes first.
fn canonical_cycle(q: &[f64]) -> Vec<f64> {
    let w: Vec<f64> = q.iter().map(|&t| t.rem_euclid(TWO_PI)).collect();
    let i0 = w
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    (0..w.len()).map(|i| w[(i0 + i) % w.len()]).collect()
}

/// Winding number of a closed parameter cycle around the table.
fn winding(q: &[f64]) -> usize {
    let m = q.len();
    let mut total = 0.0;
    for i in 0..m {
        total += (q[(i + 1) % m] - q[i]).rem_euclid(TWO_PI);
    }
    (total / TWO_PI).round() as usize
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{cross2, ProjectiveMap};
    use crate::numerics::RngStream;

    fn concentric_discs() -> Billiard {
        Billiard::new(SupportBody2::disc(1.0), SupportBody2::disc(2.0)).unwrap()
    }

    fn ellipse_pair() -> Billiard {
        let table = SupportBody2::ellipse(
            Matrix2::new(3.2, 0.0, 0.0, 4.5),
            Point::new(0.05, 0.02),
        )
        .unwrap();
        let ambient = SupportBody2::ellipse(
            Matrix2::new(1.0 / 1.21, 0.0, 0.0, 1.0 / 1.21),
            Point::new(-0.03, 0.04),
        )
        .unwrap();
        Billiard::new(table, ambient).unwrap()
    }

    #[test]
    fn diameter_state_of_concentric_discs_is_two_periodic() {
        let b = concentric_discs();
        let s0 = b.initial_state(0.0, Point::new(-1.0, 0.0)).unwrap();
        assert!(circ_dist(s0.p, PI) < 1e-12, "diameter ray should exit at the antipode");
        let orbit = b.orbit(s0, 5).unwrap();
        for (j, s) in orbit.states.iter().enumerate() {
            let expect = if j % 2 == 0 { 0.0 } else { PI };
            assert!(
                circ_dist(s.q, expect) < 1e-10,
                "bounce {j} drifted off the diameter: q = {}",
                s.q
            );
        }
        for (j, len) in orbit.segment_lengths.iter().enumerate() {
            assert!(
                (len - 3.0_f64.ln()).abs() < 1e-10,
                "segment {j} length {len} should be ln 3"
            );
        }
    }

    #[test]
    fn concentric_discs_reflect_specularly_and_preserve_chord_angle() {
        let b = concentric_discs();
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let s0 = b.initial_state(0.0, Point::new(-c, c)).unwrap();
        let orbit = b.orbit(s0, 100).unwrap();
        let pts: Vec<Point> =
            orbit.states.iter().map(|s| b.table().boundary_point(s.q)).collect();
        let mut first = None;
        for j in 1..pts.len() {
            let d = (pts[j] - pts[j - 1]).normalize();
            let tau = b.table().boundary_velocity(orbit.states[j].q).normalize();
            let s = cross2(d, tau).abs();
            match first {
                None => {
                    assert!(
                        (s - (PI / 4.0).sin()).abs() < 1e-10,
                        "initial chord angle should be 45 degrees, sine was {s}"
                    );
                    first = Some(s);
                }
                Some(s0) => assert!(
                    (s - s0).abs() < 1e-9,
                    "chord angle drifted by {:.2e} at bounce {j}",
                    (s - s0).abs()
                ),
            }
        }
        assert!(orbit.max_residual < 1e-9, "residual {}", orbit.max_residual);
    }

    #[test]
    fn geometric_and_variational_reflections_agree() {
        let table =
            SupportBody2::ellipse(Matrix2::new(2.2, 0.3, 0.3, 3.1), Point::zeros()).unwrap();
        let ambient = SupportBody2::ellipse(
            Matrix2::new(1.0 / 1.21, 0.0, 0.0, 1.0 / 1.21),
            Point::new(0.15, -0.1),
        )
        .unwrap();
        let b = Billiard::new(table, ambient).unwrap();
        let x0 = b.table().boundary_point(0.3);
        let s0 = b.initial_state(0.3, Point::new(-0.05, 0.02) - x0).unwrap();

        let geo = b.reflect(s0).unwrap();
        let var = b.variational_reflect(s0).unwrap();
        assert!(circ_dist(geo.q, var.q) < 1e-12);
        assert!(
            circ_dist(geo.p, var.p) < 1e-8,
            "tangent construction and stationarity root differ by {:.2e}",
            circ_dist(geo.p, var.p)
        );

        let next = b.reflect(geo).unwrap();
        let r = b
            .reflection_residual(x0, geo.q, b.table().boundary_point(next.q))
            .unwrap();
        assert!(r.abs() < 1e-8, "stationarity residual at the reflection is {r:.2e}");
    }

    #[test]
    fn reflection_matches_hyperbolic_billiard_in_the_klein_disc() {
        // With the unit disc as surrounding body the chord functional
        // differs from the hyperbolic one by a telescoping potential,
        // so the reflection law must coincide with the metric
        // reflection of the Klein model.
        let table = SupportBody2::ellipse(
            Matrix2::new(3.0, 0.0, 0.0, 5.0),
            Point::new(0.1, -0.05),
        )
        .unwrap();
        let b = Billiard::new(table, SupportBody2::disc(1.0)).unwrap();
        let x0 = b.table().boundary_point(0.7);
        let s0 = b.initial_state(0.7, Point::new(-0.1, 0.1) - x0).unwrap();
        let orbit = b.orbit(s0, 12).unwrap();
        let pts: Vec<Point> =
            orbit.states.iter().map(|s| b.table().boundary_point(s.q)).collect();
        for j in 1..pts.len() - 1 {
            let x = pts[j];
            let v_in = x - pts[j - 1];
            let tau = b.table().boundary_velocity(orbit.states[j].q);
            let g = |u: Point, w: Point| {
                u.dot(&w) * (1.0 - x.norm_squared()) + x.dot(&u) * x.dot(&w)
            };
            let v_out = (2.0 * g(v_in, tau) / g(tau, tau)) * tau - v_in;
            let d_out = (pts[j + 1] - x).normalize();
            let v_out = v_out.normalize();
            assert!(
                cross2(v_out, d_out).abs() < 1e-8 && v_out.dot(&d_out) > 0.0,
                "bounce {j}: Klein reflection and tangent construction disagree by {:.2e}",
                cross2(v_out, d_out).abs()
            );
        }
    }

    #[test]
    fn two_periodic_orbit_on_concentric_discs_has_length_two_ln_three() {
        let b = concentric_discs();
        let orbit = b.periodic_orbit(2, 1).unwrap();
        assert!(orbit.closed && orbit.rotation == Some(1));
        assert!(
            (orbit.total_length() - 2.0 * 3.0_f64.ln()).abs() < 1e-8,
            "total length {} should be 2 ln 3",
            orbit.total_length()
        );
        let (q0, q1) = (orbit.states[0].q, orbit.states[1].q);
        assert!(circ_dist(q0 + PI, q1) < 1e-7, "bounce points should be antipodal");
        assert!(orbit.max_residual < 1e-10, "residual {}", orbit.max_residual);

        let (_, dual_orbit) = b.dual(&orbit).unwrap();
        assert!(
            (dual_orbit.total_length() - orbit.total_length()).abs() < 1e-9,
            "dual length {} vs {}",
            dual_orbit.total_length(),
            orbit.total_length()
        );
        assert!(dual_orbit.max_residual < 1e-7);
    }

    #[test]
    fn two_periodic_orbit_on_offset_discs_lies_on_the_line_of_centers() {
        let table =
            SupportBody2::ellipse(Matrix2::new(4.0, 0.0, 0.0, 4.0), Point::new(0.1, 0.0))
                .unwrap();
        let ambient = SupportBody2::ellipse(
            Matrix2::new(1.0 / 2.25, 0.0, 0.0, 1.0 / 2.25),
            Point::new(-0.2, 0.0),
        )
        .unwrap();
        let b = Billiard::new(table, ambient).unwrap();
        let orbit = b.periodic_orbit(2, 1).unwrap();
        let pts: Vec<Point> =
            orbit.states.iter().map(|s| b.table().boundary_point(s.q)).collect();
        for (j, x) in pts.iter().enumerate() {
            assert!(x.y.abs() < 1e-6, "bounce {j} off the line of centers: {x:?}");
        }
        let xs = [pts[0].x, pts[1].x];
        let (lo, hi) = (xs[0].min(xs[1]), xs[0].max(xs[1]));
        assert!((lo + 0.4).abs() < 1e-6 && (hi - 0.6).abs() < 1e-6, "extremes {lo}, {hi}");
        let hilbert = b
            .metric()
            .distance(MetricKind::Hilbert, pts[0], pts[1])
            .unwrap();
        assert!(
            (orbit.total_length() - 2.0 * hilbert).abs() < 1e-8,
            "round trip should be twice the symmetrized distance"
        );
    }

    #[test]
    fn three_periodic_orbit_matches_its_dual_in_length_and_returns_under_double_duality() {
        let b = ellipse_pair();
        let orbit = b.periodic_orbit(3, 1).unwrap();
        assert!(orbit.closed && orbit.rotation == Some(1));
        assert!(orbit.max_residual < 1e-9, "residual {}", orbit.max_residual);
        assert!(orbit.segment_lengths.iter().all(|&l| l > 0.05));

        let (dual_b, dual_orbit) = b.dual(&orbit).unwrap();
        let rel = (dual_orbit.total_length() - orbit.total_length()).abs()
            / orbit.total_length();
        assert!(rel < 1e-6, "dual total length differs by relative {rel:.2e}");
        assert!(
            dual_orbit.max_residual < 1e-6,
            "dual sequence violates the dual reflection law: {:.2e}",
            dual_orbit.max_residual
        );
        let m = orbit.states.len();
        let class = |r: usize| r.min(m - r);
        assert_eq!(
            class(orbit.rotation.unwrap()),
            class(dual_orbit.rotation.unwrap()),
            "rotation classes differ"
        );

        // Double duality around the origin of the dual chart returns
        // the primal bounce points relative to the original anchor.
        let anchor = b.table().centroid();
        let (dd_b, dd_orbit) = dual_b.dual_with_anchor(&dual_orbit, Point::zeros()).unwrap();
        let primal: Vec<Point> = orbit
            .states
            .iter()
            .map(|s| b.table().boundary_point(s.q) - anchor)
            .collect();
        let recovered: Vec<Point> = dd_orbit
            .states
            .iter()
            .map(|s| dd_b.table().boundary_point(s.q))
            .collect();
        for x in &primal {
            let nearest = recovered.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-8, "double dual misses a primal bounce point by {nearest:.2e}");
        }
    }

    #[test]
    fn orbit_in_an_ellipse_table_has_conserved_pencil_parameter_and_caustics() {
        let a = Matrix2::new(4.0, 0.0, 0.0, 2.5);
        let table = SupportBody2::ellipse(a, Point::zeros()).unwrap();
        let b = Billiard::new(table, SupportBody2::disc(1.0)).unwrap();
        let x0 = b.table().boundary_point(0.1);
        let s0 = b.initial_state(0.1, Point::new(-0.1, 0.05) - x0).unwrap();
        let orbit = b.orbit(s0, 40).unwrap();

        let data = caustics(&a, &orbit).unwrap();
        assert!(
            data.pencil_spread < 1e-8,
            "pencil parameter drifts by {:.2e}",
            data.pencil_spread
        );
        assert!(
            data.pencil_residual < 1e-6,
            "outer conic leaves the pencil by {:.2e}",
            data.pencil_residual
        );
        assert!(
            data.tangency_residual < 1e-6,
            "a segment misses the inner caustic by {:.2e}",
            data.tangency_residual
        );
        assert!(
            data.harmonic_residual < 1e-7,
            "caustic quadruple is not harmonic: {:.2e}",
            data.harmonic_residual
        );
        assert!(!data.outer.is_degenerate() && !data.inner.is_degenerate());
    }

    #[test]
    fn pencil_parameter_examples() {
        let a = Matrix2::new(4.0, 0.0, 0.0, 4.0);
        let t = pencil_parameter(&a, Point::new(0.9, 0.0)).unwrap();
        assert!((t - 11.789_473_684_210_526).abs() < 1e-12, "t = {t}");
        let on_table = pencil_parameter(&a, Point::new(0.5, 0.0)).unwrap();
        assert!(on_table.abs() < 1e-15, "points of the table map to parameter 0");
        assert!(pencil_parameter(&a, Point::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn conjugating_by_a_homography_commutes_with_reflection() {
        let b = ellipse_pair();
        let x0 = b.table().boundary_point(1.1);
        let s0 = b.initial_state(1.1, Point::new(0.0, -0.05) - x0).unwrap();
        let out = b.reflect(s0).unwrap();
        let rng = RngStream::new(2026, 0);
        for counter in 0..3 {
            let g = ProjectiveMap::near_identity(&rng, counter, 0.04);
            let table_g = b.table().apply_projective(&g).unwrap();
            let ambient_g = b.ambient().apply_projective(&g).unwrap();
            let bg = Billiard::new(table_g, ambient_g).unwrap();
            let map_state = |s: BounceState| -> BounceState {
                let x = g.apply_point_in_chart(b.table().boundary_point(s.q)).unwrap();
                let y = g.apply_point_in_chart(b.ambient().boundary_point(s.p)).unwrap();
                BounceState {
                    q: bg.table().normal_parameter(x),
                    p: bg.ambient().normal_parameter(y),
                }
            };
            let via_map = map_state(out);
            let via_reflect = bg.reflect(map_state(s0)).unwrap();
            assert!(
                circ_dist(via_map.q, via_reflect.q) < 1e-6
                    && circ_dist(via_map.p, via_reflect.p) < 1e-6,
                "homography {counter}: reflect and conjugation disagree (dq {:.2e}, dp {:.2e})",
                circ_dist(via_map.q, via_reflect.q),
                circ_dist(via_map.p, via_reflect.p)
            );
        }
    }

    #[test]
    fn input_validation_is_enforced() {
        let b = concentric_discs();
        assert!(b.periodic_orbit(4, 2).is_err(), "winding must be coprime to the period");
        assert!(b.periodic_orbit(3, 0).is_err());
        assert!(b.periodic_orbit(3, 3).is_err());
        assert!(b.orbit(BounceState { q: 0.0, p: PI }, 1).is_err());

        let square = SupportBody2::lp_ball(f64::INFINITY, [2.0, 2.0]).unwrap();
        let flat = Billiard::new(square, SupportBody2::disc(2.0)).unwrap();
        assert!(matches!(
            flat.reflect(BounceState { q: 0.3, p: 0.0 }),
            Err(GeomError::CurvatureUnavailable)
        ));

        // A table touching the surrounding body is rejected outright.
        assert!(Billiard::new(SupportBody2::disc(1.0), SupportBody2::disc(1.0)).is_err());
    }
}
