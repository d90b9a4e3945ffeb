//! Grid-based convex duality for log-concave weights: discrete Legendre
//! transforms on boxes, twisted products with a coupling parameter, even
//! moments of the bilinear pairing, and a half-line sinh pairing, each
//! accompanied by the Gaussian closed form that saturates it.
//!
//! Functions live on uniform grids over `[-half_width, half_width]^n`
//! with `n <= 2`; `+inf` marks points outside an effective domain. The
//! integral operations enforce sign-flip symmetry by averaging the input
//! over coordinate reflections before computing.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numerics::double_factorial;

/// Errors from grid-function operations.
#[derive(Debug, Clone, Error)]
pub enum FunctionalError {
    /// Grid data fails structural validation.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    /// The integrand has not decayed at the edge of the grid box.
    #[error("box too small: {0}")]
    BoxTooSmall(String),
    /// A parameter violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Default box half-width for preset grids, wide enough that every
/// shipped example decays below the edge rejection threshold even at
/// coupling 0.9.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

/// An integral operation rejects its grid when the integrand at the box
/// edge exceeds this fraction of its peak.
const EDGE_DECAY_RATIO: f64 = 1e-3;

/// Sign-flip symmetrization that moves any value by more than this is
/// reported on stderr.
const SYMMETRY_WARN_TOL: f64 = 1e-12;

/// Default per-axis resolution for preset grids.
pub fn default_resolution(n: usize) -> usize {
    if n == 1 {
        1024
    } else {
        256
    }
}

/// A function sampled on a uniform grid over `[-half_width, half_width]^n`.
///
/// Values may be `+inf` (outside the effective domain) but never NaN or
/// `-inf`, and at least one value must be finite. For `n = 2` the layout
/// is row-major: `values[i * resolution + j]` holds the value at
/// `(node(i), node(j))`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    n: usize,
    half_width: f64,
    resolution: usize,
    values: Vec<f64>,
}

impl GridFunction {
    /// Builds a grid function after validating shape and values.
    pub fn new(
        n: usize,
        half_width: f64,
        resolution: usize,
        values: Vec<f64>,
    ) -> Result<Self, FunctionalError> {
        if n != 1 && n != 2 {
            return Err(FunctionalError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {n}"
            )));
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(FunctionalError::InvalidGrid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if resolution < 4 {
            return Err(FunctionalError::InvalidGrid(format!(
                "resolution must be at least 4, got {resolution}"
            )));
        }
        let expect = resolution.pow(n as u32);
        if values.len() != expect {
            return Err(FunctionalError::InvalidGrid(format!(
                "expected {expect} values for resolution {resolution} in dimension {n}, got {}",
                values.len()
            )));
        }
        let mut any_finite = false;
        for &v in &values {
            if v.is_nan() {
                return Err(FunctionalError::InvalidGrid("values contain NaN".into()));
            }
            if v == f64::NEG_INFINITY {
                return Err(FunctionalError::InvalidGrid(
                    "values contain -inf; only +inf marks points outside the domain".into(),
                ));
            }
            any_finite |= v.is_finite();
        }
        if !any_finite {
            return Err(FunctionalError::InvalidGrid(
                "every value is infinite; the effective domain is empty".into(),
            ));
        }
        Ok(GridFunction {
            n,
            half_width,
            resolution,
            values,
        })
    }

    /// Samples a one-dimensional function on the grid.
    pub fn sample_1d(
        half_width: f64,
        resolution: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, FunctionalError> {
        let nodes = axis_nodes(half_width, resolution);
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(1, half_width, resolution, values)
    }

    /// Samples a two-dimensional function on the grid.
    pub fn sample_2d(
        half_width: f64,
        resolution: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, FunctionalError> {
        let nodes = axis_nodes(half_width, resolution);
        let mut values = Vec::with_capacity(resolution * resolution);
        for &x in &nodes {
            for &y in &nodes {
                values.push(f(x, y));
            }
        }
        Self::new(2, half_width, resolution, values)
    }

    /// The standard Gaussian exponent `|x|^2 / 2` on the default grid.
    pub fn standard_gaussian(n: usize) -> Result<Self, FunctionalError> {
        let res = default_resolution(n);
        match n {
            1 => Self::sample_1d(DEFAULT_HALF_WIDTH, res, |x| 0.5 * x * x),
            2 => Self::sample_2d(DEFAULT_HALF_WIDTH, res, |x, y| 0.5 * (x * x + y * y)),
            _ => Err(FunctionalError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {n}"
            ))),
        }
    }

    /// The separable power well `sum_i |x_i|^p / p` on the default grid.
    pub fn power(n: usize, p: f64) -> Result<Self, FunctionalError> {
        if !p.is_finite() || p < 1.0 {
            return Err(FunctionalError::InvalidInput(format!(
                "power exponent must be >= 1, got {p}"
            )));
        }
        let res = default_resolution(n);
        match n {
            1 => Self::sample_1d(DEFAULT_HALF_WIDTH, res, |x| x.abs().powf(p) / p),
            2 => Self::sample_2d(DEFAULT_HALF_WIDTH, res, |x, y| {
                (x.abs().powf(p) + y.abs().powf(p)) / p
            }),
            _ => Err(FunctionalError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {n}"
            ))),
        }
    }

    /// Grid dimension (1 or 2).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Box half-width.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of nodes per axis.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Sampled values (row-major for `n = 2`).
    pub fn values(&self) -> &[f64] {
        self.values.as_slice()
    }

    /// Spacing between adjacent nodes on one axis.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.resolution as f64 - 1.0)
    }

    /// Axis node coordinates, symmetric about zero.
    pub fn nodes(&self) -> Vec<f64> {
        axis_nodes(self.half_width, self.resolution)
    }

    /// Values averaged over coordinate sign flips, plus the largest
    /// change the averaging made. Orbits touching `+inf` become `+inf`.
    fn symmetrized_values(&self) -> (Vec<f64>, f64) {
        let res = self.resolution;
        let mut out = self.values.clone();
        let mut max_change: f64 = 0.0;
        let orbit = |vals: &[f64]| -> f64 {
            if vals.iter().any(|v| v.is_infinite()) {
                f64::INFINITY
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        match self.n {
            1 => {
                for i in 0..res {
                    let j = res - 1 - i;
                    let s = orbit(&[self.values[i], self.values[j]]);
                    max_change = max_change.max(change_size(self.values[i], s));
                    out[i] = s;
                }
            }
            _ => {
                for i in 0..res {
                    let ri = res - 1 - i;
                    for j in 0..res {
                        let rj = res - 1 - j;
                        let s = orbit(&[
                            self.values[i * res + j],
                            self.values[ri * res + j],
                            self.values[i * res + rj],
                            self.values[ri * res + rj],
                        ]);
                        max_change = max_change.max(change_size(self.values[i * res + j], s));
                        out[i * res + j] = s;
                    }
                }
            }
        }
        (out, max_change)
    }
}

/// A Gaussian exponent `<Ax, x>/2 + c` with symmetric positive-definite
/// matrix `A` in dimension 1 or 2.
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    n: usize,
    a: Vec<f64>,
    c: f64,
}

impl GaussianSpec {
    /// Builds the spec from the row-major matrix entries (`1` entry for
    /// `n = 1`, `4` for `n = 2`) and the additive offset.
    pub fn new(n: usize, entries: &[f64], offset: f64) -> Result<Self, FunctionalError> {
        if !offset.is_finite() {
            return Err(FunctionalError::InvalidInput(format!(
                "offset must be finite, got {offset}"
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(FunctionalError::InvalidInput(
                "matrix entries must be finite".into(),
            ));
        }
        match n {
            1 => {
                if entries.len() != 1 {
                    return Err(FunctionalError::InvalidInput(format!(
                        "expected 1 matrix entry for dimension 1, got {}",
                        entries.len()
                    )));
                }
                if entries[0] <= 0.0 {
                    return Err(FunctionalError::InvalidInput(format!(
                        "matrix must be positive, got {}",
                        entries[0]
                    )));
                }
            }
            2 => {
                if entries.len() != 4 {
                    return Err(FunctionalError::InvalidInput(format!(
                        "expected 4 matrix entries for dimension 2, got {}",
                        entries.len()
                    )));
                }
                let scale = entries.iter().fold(0.0f64, |m, e| m.max(e.abs()));
                if (entries[1] - entries[2]).abs() > 1e-9 * (1.0 + scale) {
                    return Err(FunctionalError::InvalidInput(
                        "matrix must be symmetric".into(),
                    ));
                }
                let det = entries[0] * entries[3] - entries[1] * entries[2];
                if entries[0] <= 0.0 || det <= 0.0 {
                    return Err(FunctionalError::InvalidInput(
                        "matrix must be positive definite".into(),
                    ));
                }
            }
            _ => {
                return Err(FunctionalError::InvalidInput(format!(
                    "dimension must be 1 or 2, got {n}"
                )))
            }
        }
        Ok(GaussianSpec {
            n,
            a: entries.to_vec(),
            c: offset,
        })
    }

    /// Dimension (1 or 2).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> &[f64] {
        self.a.as_slice()
    }

    /// Additive offset.
    pub fn offset(&self) -> f64 {
        self.c
    }

    /// Samples the quadratic exponent on a grid.
    pub fn sample(&self, half_width: f64, resolution: usize) -> Result<GridFunction, FunctionalError> {
        match self.n {
            1 => {
                let a = self.a[0];
                let c = self.c;
                GridFunction::sample_1d(half_width, resolution, |x| 0.5 * a * x * x + c)
            }
            _ => {
                let (a00, a11) = (self.a[0], self.a[3]);
                let a01 = 0.5 * (self.a[1] + self.a[2]);
                let c = self.c;
                GridFunction::sample_2d(half_width, resolution, |x, y| {
                    0.5 * (a00 * x * x + 2.0 * a01 * x * y + a11 * y * y) + c
                })
            }
        }
    }
}

fn change_size(before: f64, after: f64) -> f64 {
    if before.is_infinite() && after.is_infinite() {
        0.0
    } else if before.is_infinite() || after.is_infinite() {
        f64::INFINITY
    } else {
        (after - before).abs()
    }
}

/// Axis nodes `step * (i - (resolution-1)/2)`, exactly symmetric about 0.
fn axis_nodes(half_width: f64, resolution: usize) -> Vec<f64> {
    let step = 2.0 * half_width / (resolution as f64 - 1.0);
    let center = 0.5 * (resolution as f64 - 1.0);
    (0..resolution).map(|i| step * (i as f64 - center)).collect()
}

/// Trapezoid weights on one axis of the box.
fn trapezoid_weights(half_width: f64, resolution: usize) -> Vec<f64> {
    let step = 2.0 * half_width / (resolution as f64 - 1.0);
    (0..resolution)
        .map(|i| {
            if i == 0 || i == resolution - 1 {
                0.5 * step
            } else {
                step
            }
        })
        .collect()
}

/// One-dimensional discrete Legendre conjugate onto the same node set:
/// `out[k] = max_i nodes[i] * nodes[k] - phi[i]`, skipping infinite
/// entries. The scan for node `k` starts at the argmax for node `k - 1`,
/// which cannot lie to its right because the argmax of
/// `x * xi - phi(x)` is nondecreasing in `xi`.
fn conjugate_1d(nodes: &[f64], phi: &[f64], out: &mut [f64]) {
    let n = nodes.len();
    let mut start = 0usize;
    let mut started = false;
    for k in 0..n {
        let xi = nodes[k];
        let mut best = f64::NEG_INFINITY;
        let mut best_i = usize::MAX;
        let lo = if started { start } else { 0 };
        for i in lo..n {
            let p = phi[i];
            if p.is_finite() {
                let v = nodes[i] * xi - p;
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
        }
        if best_i != usize::MAX {
            start = best_i;
            started = true;
        }
        out[k] = best;
    }
}

/// Discrete Legendre transform of `phi`, evaluated on the same grid.
///
/// The conjugate is a direct maximum over grid nodes, so it is exact for
/// the sampled data and always finite (the input has at least one finite
/// value, which makes an everywhere-infinite input unrepresentable). In
/// two dimensions the maximum factors into two one-dimensional passes:
/// conjugate each row in the second coordinate, negate, then conjugate
/// in the first coordinate.
///
/// ```
/// use funklab::functional::{legendre, GridFunction};
///
/// let phi = GridFunction::sample_1d(6.0, 193, |x| 0.5 * x * x).unwrap();
/// let dual = legendre(&phi);
/// for (&xi, &v) in phi.nodes().iter().zip(dual.values()) {
///     assert!((v - 0.5 * xi * xi).abs() < 1e-9);
/// }
/// ```
pub fn legendre(phi: &GridFunction) -> GridFunction {
    let res = phi.resolution;
    let nodes = phi.nodes();
    let values = match phi.n {
        1 => {
            let mut out = vec![0.0; res];
            conjugate_1d(&nodes, &phi.values, &mut out);
            out
        }
        _ => {
            // gt[k2 * res + i] = max_{x2} node(k2) * x2 - phi(node(i), x2)
            let mut gt = vec![0.0; res * res];
            let mut row = vec![0.0; res];
            for i in 0..res {
                conjugate_1d(&nodes, &phi.values[i * res..(i + 1) * res], &mut row);
                for k2 in 0..res {
                    gt[k2 * res + i] = row[k2];
                }
            }
            let mut out = vec![0.0; res * res];
            let mut inner = vec![0.0; res];
            for k2 in 0..res {
                let g_row = &gt[k2 * res..(k2 + 1) * res];
                for i in 0..res {
                    inner[i] = -g_row[i];
                }
                conjugate_1d(&nodes, &inner, &mut row);
                for k1 in 0..res {
                    out[k1 * res + k2] = row[k1];
                }
            }
            out
        }
    };
    GridFunction {
        n: phi.n,
        half_width: phi.half_width,
        resolution: res,
        values,
    }
}

/// Symmetrizes and warns once if the input was not sign-flip symmetric.
fn symmetrize_with_warning(phi: &GridFunction) -> Vec<f64> {
    let (values, change) = phi.symmetrized_values();
    if change > SYMMETRY_WARN_TOL {
        eprintln!(
            "warning: grid values symmetrized over sign flips (largest change {change:.3e})"
        );
    }
    values
}

fn validate_coupling(coupling: f64) -> Result<(), FunctionalError> {
    if !(0.0..1.0).contains(&coupling) {
        return Err(FunctionalError::InvalidInput(format!(
            "coupling must lie in [0, 1), got {coupling}"
        )));
    }
    Ok(())
}

fn validate_exponent_range(phi: &GridFunction, coupling: f64) -> Result<(), FunctionalError> {
    let peak = coupling * phi.n as f64 * phi.half_width * phi.half_width;
    if peak > 700.0 {
        return Err(FunctionalError::InvalidInput(format!(
            "coupling {coupling} over a box of half-width {} exceeds the floating-point \
             exponent range",
            phi.half_width
        )));
    }
    Ok(())
}

fn ensure_edge_decay(peak_log: f64, edge_log: f64) -> Result<(), FunctionalError> {
    if edge_log > peak_log + EDGE_DECAY_RATIO.ln() {
        let ratio = (edge_log - peak_log).exp();
        return Err(FunctionalError::BoxTooSmall(format!(
            "integrand at the grid edge reaches {ratio:.2e} of its peak; increase half_width"
        )));
    }
    Ok(())
}

/// Subsampled axis indices that always include both edges.
fn coarse_indices(res: usize) -> Vec<usize> {
    let stride = (res / 16).max(1);
    let mut v: Vec<usize> = (0..res).step_by(stride).collect();
    if *v.last().unwrap() != res - 1 {
        v.push(res - 1);
    }
    v
}

/// Twisted product of `phi` with its Legendre transform:
/// the integral of `exp(-phi(x) - Lphi(xi) + coupling * <x, xi>)` over
/// the product of the grid box with itself.
///
/// The input is symmetrized over sign flips first. The value is at most
/// `(2 pi)^n (1 - coupling^2)^{-n/2}`, with equality exactly for
/// Gaussian exponents. Errors with "box too small" when the integrand
/// has not decayed at the box edge.
pub fn twisted_product(phi: &GridFunction, coupling: f64) -> Result<f64, FunctionalError> {
    validate_coupling(coupling)?;
    validate_exponent_range(phi, coupling)?;
    let res = phi.resolution;
    let nodes = phi.nodes();
    let w = trapezoid_weights(phi.half_width, res);
    let phi_s = symmetrize_with_warning(phi);
    let sym = GridFunction {
        n: phi.n,
        half_width: phi.half_width,
        resolution: res,
        values: phi_s,
    };
    let psi = legendre(&sym);
    let phi_s = &sym.values;
    let psi = &psi.values;

    if phi.n == 1 {
        let mut total = 0.0;
        let mut peak = f64::NEG_INFINITY;
        let mut edge = f64::NEG_INFINITY;
        for i in 0..res {
            if !phi_s[i].is_finite() {
                continue;
            }
            let xi_edge = i == 0 || i == res - 1;
            let a = coupling * nodes[i];
            for k in 0..res {
                let expo = a * nodes[k] - phi_s[i] - psi[k];
                total += w[i] * w[k] * expo.exp();
                if expo > peak {
                    peak = expo;
                }
                if (xi_edge || k == 0 || k == res - 1) && expo > edge {
                    edge = expo;
                }
            }
        }
        ensure_edge_decay(peak, edge)?;
        return Ok(total);
    }

    // Factor the four-fold sum through the coupling kernel
    // E[a][b] = exp(coupling * node(a) * node(b)):
    // sum F (E tensor E) G = sum (E . F . E) element-wise G.
    let mut kernel = vec![0.0; res * res];
    for a in 0..res {
        for b in 0..res {
            kernel[a * res + b] = (coupling * nodes[a] * nodes[b]).exp();
        }
    }
    let mut f = vec![0.0; res * res];
    let mut g = vec![0.0; res * res];
    for i in 0..res {
        for j in 0..res {
            let idx = i * res + j;
            f[idx] = if phi_s[idx].is_finite() {
                w[i] * w[j] * (-phi_s[idx]).exp()
            } else {
                0.0
            };
            g[idx] = w[i] * w[j] * (-psi[idx]).exp();
        }
    }
    let mut h1 = vec![0.0; res * res];
    matmul(&f, &kernel, res, &mut h1);
    let mut h2 = vec![0.0; res * res];
    matmul(&kernel, &h1, res, &mut h2);
    let total: f64 = h2.iter().zip(&g).map(|(a, b)| a * b).sum();

    let idx = coarse_indices(res);
    let mut peak = f64::NEG_INFINITY;
    let mut edge = f64::NEG_INFINITY;
    for &i1 in &idx {
        for &i2 in &idx {
            let ph = phi_s[i1 * res + i2];
            if !ph.is_finite() {
                continue;
            }
            let x_edge = i1 == 0 || i1 == res - 1 || i2 == 0 || i2 == res - 1;
            for &k1 in &idx {
                for &k2 in &idx {
                    let expo = coupling * (nodes[i1] * nodes[k1] + nodes[i2] * nodes[k2])
                        - ph
                        - psi[k1 * res + k2];
                    if expo > peak {
                        peak = expo;
                    }
                    if (x_edge || k1 == 0 || k1 == res - 1 || k2 == 0 || k2 == res - 1)
                        && expo > edge
                    {
                        edge = expo;
                    }
                }
            }
        }
    }
    ensure_edge_decay(peak, edge)?;
    Ok(total)
}

/// Row-major square matrix product `out = a * b`.
fn matmul(a: &[f64], b: &[f64], n: usize, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let b_row = &b[k * n..(k + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                out_row[j] += aik * b_row[j];
            }
        }
    }
}

/// Twisted product of a Gaussian exponent with its Legendre transform,
/// in closed form: `(2 pi)^n (1 - coupling^2)^{-n/2}`.
///
/// Substituting `x -> A^{-1/2} x`, `xi -> A^{1/2} xi` reduces any
/// admissible matrix to the identity and cancels the offset, so the
/// value depends on neither.
///
/// ```
/// use funklab::functional::{twisted_product_gaussian, GaussianSpec};
///
/// let spec = GaussianSpec::new(1, &[2.0], 0.3).unwrap();
/// let v = twisted_product_gaussian(&spec, 0.5).unwrap();
/// assert!((v - 2.0 * std::f64::consts::PI / 0.75_f64.sqrt()).abs() < 1e-12);
/// ```
pub fn twisted_product_gaussian(
    spec: &GaussianSpec,
    coupling: f64,
) -> Result<f64, FunctionalError> {
    validate_coupling(coupling)?;
    let n = spec.n as f64;
    Ok((2.0 * PI).powi(spec.n as i32) * (1.0 - coupling * coupling).powf(-0.5 * n))
}

/// Even moment of the bilinear pairing against `exp(-phi - Lphi)`:
/// the integral of `<x, xi>^{2j} exp(-phi(x) - Lphi(xi))`.
///
/// The input is symmetrized over sign flips first (odd moments of a
/// sign-symmetric weight vanish, so only even orders are exposed).
pub fn functional_moment(phi: &GridFunction, j: u32) -> Result<f64, FunctionalError> {
    if j > 16 {
        return Err(FunctionalError::InvalidInput(format!(
            "moment order must satisfy j <= 16, got {j}"
        )));
    }
    let res = phi.resolution;
    let nodes = phi.nodes();
    let w = trapezoid_weights(phi.half_width, res);
    let phi_s = symmetrize_with_warning(phi);
    let sym = GridFunction {
        n: phi.n,
        half_width: phi.half_width,
        resolution: res,
        values: phi_s,
    };
    let psi = legendre(&sym);
    let phi_s = &sym.values;
    let psi = &psi.values;
    let two_j = 2 * j;

    if phi.n == 1 {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..res {
            if phi_s[i].is_finite() {
                a += w[i] * nodes[i].powi(two_j as i32) * (-phi_s[i]).exp();
            }
            b += w[i] * nodes[i].powi(two_j as i32) * (-psi[i]).exp();
        }
        let mut peak = f64::NEG_INFINITY;
        let mut edge = f64::NEG_INFINITY;
        for i in 0..res {
            if !phi_s[i].is_finite() {
                continue;
            }
            let xi_edge = i == 0 || i == res - 1;
            for k in 0..res {
                let dot = nodes[i] * nodes[k];
                let weight_log = if two_j == 0 {
                    0.0
                } else if dot == 0.0 {
                    continue;
                } else {
                    two_j as f64 * dot.abs().ln()
                };
                let expo = weight_log - phi_s[i] - psi[k];
                if expo > peak {
                    peak = expo;
                }
                if (xi_edge || k == 0 || k == res - 1) && expo > edge {
                    edge = expo;
                }
            }
        }
        ensure_edge_decay(peak, edge)?;
        return Ok(a * b);
    }

    // <x, xi>^{2j} expands binomially into terms (x1 xi1)^m (x2 xi2)^{2j-m},
    // each of which factors the four-fold sum into an x-side and a xi-side
    // double sum.
    let mut pow_table = vec![vec![0.0; res]; (two_j + 1) as usize];
    for (m, row) in pow_table.iter_mut().enumerate() {
        for (i, cell) in row.iter_mut().enumerate() {
            *cell = nodes[i].powi(m as i32);
        }
    }
    let mut ea = vec![0.0; res * res];
    let mut eb = vec![0.0; res * res];
    for i in 0..res {
        for jx in 0..res {
            let idx = i * res + jx;
            ea[idx] = if phi_s[idx].is_finite() {
                w[i] * w[jx] * (-phi_s[idx]).exp()
            } else {
                0.0
            };
            eb[idx] = w[i] * w[jx] * (-psi[idx]).exp();
        }
    }
    let mut total = 0.0;
    for m in 0..=two_j {
        let c = binomial(two_j, m);
        let pm = &pow_table[m as usize];
        let pr = &pow_table[(two_j - m) as usize];
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..res {
            let mut sa = 0.0;
            let mut sb = 0.0;
            for jx in 0..res {
                sa += ea[i * res + jx] * pr[jx];
                sb += eb[i * res + jx] * pr[jx];
            }
            a += pm[i] * sa;
            b += pm[i] * sb;
        }
        total += c * a * b;
    }

    let idx = coarse_indices(res);
    let mut peak = f64::NEG_INFINITY;
    let mut edge = f64::NEG_INFINITY;
    for &i1 in &idx {
        for &i2 in &idx {
            let ph = phi_s[i1 * res + i2];
            if !ph.is_finite() {
                continue;
            }
            let x_edge = i1 == 0 || i1 == res - 1 || i2 == 0 || i2 == res - 1;
            for &k1 in &idx {
                for &k2 in &idx {
                    let dot = nodes[i1] * nodes[k1] + nodes[i2] * nodes[k2];
                    let weight_log = if two_j == 0 {
                        0.0
                    } else if dot == 0.0 {
                        continue;
                    } else {
                        two_j as f64 * dot.abs().ln()
                    };
                    let expo = weight_log - ph - psi[k1 * res + k2];
                    if expo > peak {
                        peak = expo;
                    }
                    if (x_edge || k1 == 0 || k1 == res - 1 || k2 == 0 || k2 == res - 1)
                        && expo > edge
                    {
                        edge = expo;
                    }
                }
            }
        }
    }
    ensure_edge_decay(peak, edge)?;
    Ok(total)
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Sharp upper bound for `functional_moment` over sign-symmetric inputs:
/// `(2 pi)^n (2j - 1)!! (n + 2j - 2)!! / (n - 2)!!`, attained by the
/// standard Gaussian exponent.
pub fn functional_moment_bound(n: usize, j: u32) -> f64 {
    let n_i = n as i64;
    let j_i = j as i64;
    (2.0 * PI).powi(n as i32) * double_factorial(2 * j_i - 1) * double_factorial(n_i + 2 * j_i - 2)
        / double_factorial(n_i - 2)
}

/// Half-line sinh pairing of a one-dimensional `phi` with its Legendre
/// transform: the integral over the positive quadrant of
/// `sinh(coupling * x * xi) exp(-phi(x) - Lphi(xi))`.
///
/// The input is symmetrized over sign flips first, which makes its
/// restriction to the positive half-line carry the full conjugate: for
/// an even function the supremum defining `Lphi(xi)` with `xi >= 0` is
/// attained at `x >= 0`.
pub fn half_space_sinh(phi: &GridFunction, coupling: f64) -> Result<f64, FunctionalError> {
    if phi.n != 1 {
        return Err(FunctionalError::InvalidInput(format!(
            "the half-line pairing needs a one-dimensional grid, got dimension {}",
            phi.n
        )));
    }
    validate_coupling(coupling)?;
    validate_exponent_range(phi, coupling)?;
    let res = phi.resolution;
    let nodes = phi.nodes();
    let step = phi.spacing();
    let phi_s = symmetrize_with_warning(phi);
    let sym = GridFunction {
        n: 1,
        half_width: phi.half_width,
        resolution: res,
        values: phi_s,
    };
    let psi = legendre(&sym);
    let phi_s = &sym.values;
    let psi = &psi.values;

    // Positive-axis quadrature nodes. For even resolution the positive
    // nodes are cell midpoints (uniform weight `step`); for odd
    // resolution they run from 0 to the edge as a trapezoid rule.
    let first = res / 2;
    let odd = res % 2 == 1;
    let weight = |i: usize| -> f64 {
        if odd && (i == first || i == res - 1) {
            0.5 * step
        } else {
            step
        }
    };

    let mut total = 0.0;
    let mut peak = f64::NEG_INFINITY;
    let mut edge = f64::NEG_INFINITY;
    for i in first..res {
        if !phi_s[i].is_finite() {
            continue;
        }
        let xi_edge = i == res - 1;
        for k in first..res {
            let t = coupling * nodes[i] * nodes[k];
            total += weight(i) * weight(k) * t.sinh() * (-phi_s[i] - psi[k]).exp();
            let expo = log_sinh(t) - phi_s[i] - psi[k];
            if expo > peak {
                peak = expo;
            }
            if (xi_edge || k == res - 1) && expo > edge {
                edge = expo;
            }
        }
    }
    if coupling == 0.0 {
        return Ok(0.0);
    }
    ensure_edge_decay(peak, edge)?;
    Ok(total)
}

/// `ln(sinh(t))` for `t >= 0`, stable for large `t`; `-inf` at `t = 0`.
fn log_sinh(t: f64) -> f64 {
    if t <= 0.0 {
        f64::NEG_INFINITY
    } else {
        t + (-(2.0 * t)).exp_m1().ln_1p() - std::f64::consts::LN_2
    }
}

/// Sharp upper bound for `half_space_sinh` over sign-symmetric inputs:
/// `asin(coupling) / sqrt(1 - coupling^2)`, attained by the standard
/// Gaussian exponent.
pub fn half_space_sinh_bound(coupling: f64) -> f64 {
    coupling.asin() / (1.0 - coupling * coupling).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian_twisted(n: usize, coupling: f64) -> f64 {
        (2.0 * PI).powi(n as i32) * (1.0 - coupling * coupling).powf(-0.5 * n as f64)
    }

    #[test]
    fn legendre_of_the_half_square_is_itself() {
        let phi = GridFunction::sample_1d(10.0, 1024, |x| 0.5 * x * x).unwrap();
        let dual = legendre(&phi);
        for (&xi, &v) in phi.nodes().iter().zip(dual.values()) {
            assert!(
                (v - 0.5 * xi * xi).abs() <= 1e-9,
                "conjugate of x^2/2 at xi = {xi} gave {v}, want {}",
                0.5 * xi * xi
            );
        }
    }

    #[test]
    fn legendre_of_an_interval_indicator_is_the_absolute_value() {
        let phi = GridFunction::sample_1d(10.0, 1024, |x| {
            if x.abs() <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let dual = legendre(&phi);
        let step = phi.spacing();
        for (&xi, &v) in phi.nodes().iter().zip(dual.values()) {
            assert!(v.is_finite(), "conjugate must be finite, got {v} at {xi}");
            assert!(
                (v - xi.abs()).abs() <= step * (xi.abs() + 1.0),
                "conjugate of the [-1,1] indicator at xi = {xi} gave {v}, want about {}",
                xi.abs()
            );
        }
    }

    #[test]
    fn legendre_shift_subtracts_a_linear_term() {
        let res = 1024;
        let phi = GridFunction::sample_1d(10.0, res, |x| 0.5 * x * x).unwrap();
        let step = phi.spacing();
        let z = 10.0 * step;
        let shifted = GridFunction::sample_1d(10.0, res, |x| 0.5 * (x + z) * (x + z)).unwrap();
        let dual = legendre(&phi);
        let dual_shifted = legendre(&shifted);
        let nodes = phi.nodes();
        for k in 0..res {
            let xi = nodes[k];
            if xi.abs() > 3.0 {
                continue;
            }
            let want = dual.values()[k] - z * xi;
            let got = dual_shifted.values()[k];
            assert!(
                (got - want).abs() <= 1e-8 * (1.0 + want.abs()),
                "conjugate of the shift at xi = {xi}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn legendre_of_an_anisotropic_gaussian_matches_the_inverse_form() {
        let spec = GaussianSpec::new(2, &[1.3, 0.2, 0.2, 0.8], 0.4).unwrap();
        let phi = spec.sample(10.0, 256).unwrap();
        let dual = legendre(&phi);
        let det = 1.3 * 0.8 - 0.2 * 0.2;
        let (b00, b01, b11) = (0.8 / det, -0.2 / det, 1.3 / det);
        let nodes = phi.nodes();
        let res = phi.resolution();
        for (k1, &x) in nodes.iter().enumerate() {
            for (k2, &y) in nodes.iter().enumerate() {
                if x.abs() > 3.0 || y.abs() > 3.0 {
                    continue;
                }
                let want = 0.5 * (b00 * x * x + 2.0 * b01 * x * y + b11 * y * y) - 0.4;
                let got = dual.values()[k1 * res + k2];
                assert!(
                    got <= want + 1e-12,
                    "discrete conjugate exceeds the true conjugate at ({x}, {y}): {got} > {want}"
                );
                assert!(
                    got >= want - 2e-3,
                    "discrete conjugate too far below the true conjugate at ({x}, {y}): \
                     {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn double_conjugation_minorizes_and_triple_conjugation_collapses() {
        let phi = GridFunction::sample_1d(6.0, 257, |x| x.abs().powf(1.5) + 0.3 * x.sin()).unwrap();
        let l1 = legendre(&phi);
        let l2 = legendre(&l1);
        let l3 = legendre(&l2);
        for i in 0..phi.resolution() {
            assert!(
                l2.values()[i] <= phi.values()[i] + 1e-9,
                "double conjugate must not exceed the function at node {i}: {} > {}",
                l2.values()[i],
                phi.values()[i]
            );
            assert!(
                (l3.values()[i] - l1.values()[i]).abs() <= 1e-11 * (1.0 + l1.values()[i].abs()),
                "triple conjugate differs from single at node {i}: {} vs {}",
                l3.values()[i],
                l1.values()[i]
            );
        }
    }

    #[test]
    fn fenchel_inequality_holds_on_a_two_dimensional_grid_with_infinities() {
        let res = 24;
        let phi = GridFunction::sample_2d(4.0, res, |x, y| {
            if x > 3.0 {
                f64::INFINITY
            } else {
                x.abs().powf(3.0) / 3.0 + 0.5 * y * y + 0.2 * x * y
            }
        })
        .unwrap();
        let dual = legendre(&phi);
        let nodes = phi.nodes();
        for i1 in 0..res {
            for i2 in 0..res {
                let p = phi.values()[i1 * res + i2];
                if !p.is_finite() {
                    continue;
                }
                for k1 in 0..res {
                    for k2 in 0..res {
                        let q = dual.values()[k1 * res + k2];
                        let dot = nodes[i1] * nodes[k1] + nodes[i2] * nodes[k2];
                        assert!(
                            p + q >= dot - 1e-9,
                            "pairing inequality fails: phi({i1},{i2}) + dual({k1},{k2}) = {} < {dot}",
                            p + q
                        );
                    }
                }
            }
        }
        let l2 = legendre(&dual);
        let l3 = legendre(&l2);
        for idx in 0..res * res {
            assert!(
                (l3.values()[idx] - dual.values()[idx]).abs()
                    <= 1e-11 * (1.0 + dual.values()[idx].abs()),
                "triple conjugate differs from single at {idx}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn conjugation_invariants_hold_on_random_grids(
            raw in prop::collection::vec(-5.0..5.0f64, 48),
            mask in prop::collection::vec(0..10u8, 48),
            half_width in 0.5..8.0f64,
        ) {
            let mut values: Vec<f64> = raw
                .iter()
                .zip(&mask)
                .map(|(&v, &m)| if m == 0 { f64::INFINITY } else { v })
                .collect();
            values[24] = raw[24];
            let phi = GridFunction::new(1, half_width, 48, values).unwrap();
            let nodes = phi.nodes();
            let l1 = legendre(&phi);
            let l2 = legendre(&l1);
            let l3 = legendre(&l2);
            for k in 0..48 {
                prop_assert!(l1.values()[k].is_finite());
                for i in 0..48 {
                    let p = phi.values()[i];
                    if p.is_finite() {
                        prop_assert!(
                            p + l1.values()[k] >= nodes[i] * nodes[k] - 1e-9,
                            "pairing inequality fails at ({i}, {k})"
                        );
                    }
                }
                prop_assert!(
                    l2.values()[k] <= phi.values()[k] + 1e-9,
                    "double conjugate exceeds the function at {k}"
                );
                prop_assert!(
                    (l3.values()[k] - l1.values()[k]).abs()
                        <= 1e-11 * (1.0 + l1.values()[k].abs()),
                    "triple conjugate differs from single at {k}: {} vs {}",
                    l3.values()[k],
                    l1.values()[k]
                );
            }
        }
    }

    #[test]
    fn gaussian_spec_twisted_product_matches_the_closed_form() {
        for n in [1usize, 2] {
            let entries: Vec<f64> = if n == 1 {
                vec![1.7]
            } else {
                vec![1.3, 0.2, 0.2, 0.8]
            };
            let spec = GaussianSpec::new(n, &entries, 0.25).unwrap();
            for coupling in [0.0, 0.5, 0.9] {
                let got = twisted_product_gaussian(&spec, coupling).unwrap();
                let want = gaussian_twisted(n, coupling);
                assert!(
                    (got - want).abs() <= 1e-12 * want,
                    "closed form mismatch at n = {n}, coupling = {coupling}: {got} vs {want}"
                );
            }
        }
        let spec = GaussianSpec::new(1, &[2.0], 0.3).unwrap();
        let v = twisted_product_gaussian(&spec, 0.5).unwrap();
        assert!(
            (v - 7.25520).abs() <= 1e-4,
            "twisted product at coupling 1/2 should be about 7.25520, got {v}"
        );
    }

    #[test]
    fn grid_twisted_product_reproduces_the_gaussian_value_in_one_dimension() {
        let phi = GridFunction::standard_gaussian(1).unwrap();
        for coupling in [0.0, 0.5, 0.9] {
            let got = twisted_product(&phi, coupling).unwrap();
            let want = gaussian_twisted(1, coupling);
            assert!(
                ((got - want) / want).abs() <= 1e-4,
                "grid value at coupling {coupling}: {got}, want {want}"
            );
        }
    }

    #[test]
    fn grid_twisted_product_reproduces_the_gaussian_value_in_two_dimensions() {
        let phi = GridFunction::standard_gaussian(2).unwrap();
        for coupling in [0.0, 0.5, 0.9] {
            let got = twisted_product(&phi, coupling).unwrap();
            let want = gaussian_twisted(2, coupling);
            assert!(
                ((got - want) / want).abs() <= 1e-4,
                "grid value at coupling {coupling}: {got}, want {want}"
            );
        }
    }

    #[test]
    fn quartic_twisted_product_sits_strictly_below_the_gaussian_value() {
        let phi = GridFunction::power(1, 4.0).unwrap();
        let got = twisted_product(&phi, 0.5).unwrap();
        let gaussian = gaussian_twisted(1, 0.5);
        assert!(
            got < gaussian * (1.0 - 1e-2),
            "quartic well must fall measurably below the Gaussian value: {got} vs {gaussian}"
        );
        assert!(
            got > gaussian * 0.5,
            "quartic well value implausibly small: {got}"
        );
    }

    #[test]
    fn twisted_product_symmetrizes_sign_asymmetric_input() {
        let skew = GridFunction::sample_1d(8.0, 512, |x| 0.5 * x * x + 0.3 * x).unwrap();
        let even = GridFunction::sample_1d(8.0, 512, |x| 0.5 * x * x).unwrap();
        let a = twisted_product(&skew, 0.5).unwrap();
        let b = twisted_product(&even, 0.5).unwrap();
        assert!(
            ((a - b) / b).abs() <= 1e-12,
            "sign-flip averaging should reduce the skewed input to the even one: {a} vs {b}"
        );
    }

    #[test]
    fn twisted_product_rejects_a_box_with_no_edge_decay() {
        let phi = GridFunction::sample_1d(2.0, 64, |x| 0.5 * x * x).unwrap();
        let err = twisted_product(&phi, 0.9).unwrap_err();
        assert!(
            matches!(err, FunctionalError::BoxTooSmall(_)),
            "expected a box-too-small rejection, got {err:?}"
        );
        assert!(
            err.to_string().contains("box too small"),
            "error message should name the failure: {err}"
        );
    }

    #[test]
    fn coupling_outside_the_unit_interval_is_rejected() {
        let phi = GridFunction::standard_gaussian(1).unwrap();
        for bad in [-0.1, 1.0, 1.5] {
            assert!(
                matches!(
                    twisted_product(&phi, bad),
                    Err(FunctionalError::InvalidInput(_))
                ),
                "coupling {bad} must be rejected"
            );
        }
        let spec = GaussianSpec::new(1, &[1.0], 0.0).unwrap();
        assert!(matches!(
            twisted_product_gaussian(&spec, 1.0),
            Err(FunctionalError::InvalidInput(_))
        ));
    }

    #[test]
    fn gaussian_twisted_product_is_invariant_under_orthogonal_conjugation() {
        let a = [1.3, 0.2, 0.2, 0.8];
        let theta: f64 = 0.7;
        let (s, c) = theta.sin_cos();
        // u^T a u with u the rotation by theta
        let u = [c, -s, s, c];
        let mut au = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    au[i * 2 + j] += a[i * 2 + k] * u[k * 2 + j];
                }
            }
        }
        let mut rot = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    rot[i * 2 + j] += u[k * 2 + i] * au[k * 2 + j];
                }
            }
        }
        let spec_a = GaussianSpec::new(2, &a, 0.0).unwrap();
        let spec_rot = GaussianSpec::new(2, &rot, 0.0).unwrap();
        for coupling in [0.0, 0.5, 0.9] {
            let va = twisted_product_gaussian(&spec_a, coupling).unwrap();
            let vr = twisted_product_gaussian(&spec_rot, coupling).unwrap();
            assert!(
                va == vr,
                "conjugated matrix changed the twisted product: {va} vs {vr}"
            );
        }
        // The grid route agrees for both sampled quadratic forms.
        let coupling = 0.5;
        let want = gaussian_twisted(2, coupling);
        for spec in [&spec_a, &spec_rot] {
            let grid = spec.sample(DEFAULT_HALF_WIDTH, 256).unwrap();
            let got = twisted_product(&grid, coupling).unwrap();
            assert!(
                ((got - want) / want).abs() <= 5e-3,
                "sampled quadratic form strays from the closed form: {got} vs {want}"
            );
        }
    }

    #[test]
    fn gaussian_moments_follow_the_double_factorial_rule() {
        let phi1 = GridFunction::standard_gaussian(1).unwrap();
        for j in 0..4u32 {
            let got = functional_moment(&phi1, j).unwrap();
            let odd = double_factorial(2 * j as i64 - 1);
            let want = 2.0 * PI * odd * odd;
            assert!(
                ((got - want) / want).abs() <= 1e-4,
                "one-dimensional Gaussian moment j = {j}: {got}, want {want}"
            );
        }
        let phi2 = GridFunction::standard_gaussian(2).unwrap();
        for j in 0..3u32 {
            let got = functional_moment(&phi2, j).unwrap();
            let want = (2.0 * PI).powi(2)
                * double_factorial(2 * j as i64 - 1)
                * double_factorial(2 * j as i64);
            assert!(
                ((got - want) / want).abs() <= 1e-4,
                "two-dimensional Gaussian moment j = {j}: {got}, want {want}"
            );
        }
    }

    #[test]
    fn moments_respect_the_universal_bound_and_gaussians_attain_it() {
        // The quartic conjugate decays like exp(-0.75 xi^{4/3}), so high
        // moments need a wider box than the default presets.
        let quartic = |x: f64| x.abs().powi(4) / 4.0;
        let cases = [
            GridFunction::standard_gaussian(1).unwrap(),
            GridFunction::sample_1d(14.0, 1024, quartic).unwrap(),
            GridFunction::standard_gaussian(2).unwrap(),
            GridFunction::sample_2d(14.0, 256, |x, y| quartic(x) + quartic(y)).unwrap(),
        ];
        for phi in &cases {
            for j in 0..4u32 {
                let got = functional_moment(phi, j).unwrap();
                let bound = functional_moment_bound(phi.n(), j);
                assert!(
                    got <= bound * (1.0 + 1e-9),
                    "moment j = {j} in dimension {} exceeds its bound: {got} > {bound}",
                    phi.n()
                );
            }
        }
        for n in [1usize, 2] {
            let phi = GridFunction::standard_gaussian(n).unwrap();
            for j in 0..3u32 {
                let got = functional_moment(&phi, j).unwrap();
                let bound = functional_moment_bound(n, j);
                assert!(
                    ((got - bound) / bound).abs() <= 1e-4,
                    "Gaussian should attain the moment bound at n = {n}, j = {j}: \
                     {got} vs {bound}"
                );
            }
        }
    }

    #[test]
    fn quartic_first_moment_sits_strictly_below_the_gaussian_value() {
        let phi = GridFunction::power(1, 4.0).unwrap();
        let got = functional_moment(&phi, 1).unwrap();
        let gaussian = 2.0 * PI;
        assert!(
            got < gaussian * (1.0 - 1e-2),
            "quartic moment must fall measurably below 2 pi: {got}"
        );
        assert!(got > 0.0, "moment must be positive: {got}");
    }

    #[test]
    fn moment_series_reconstructs_the_twisted_product() {
        let phi = GridFunction::standard_gaussian(1).unwrap();
        let coupling = 0.5f64;
        let mut series = 0.0;
        let mut factorial = 1.0f64; // (2j)!
        for j in 0..10u32 {
            if j > 0 {
                factorial *= (2 * j - 1) as f64 * (2 * j) as f64;
            }
            let moment = functional_moment(&phi, j).unwrap();
            series += coupling.powi(2 * j as i32) / factorial * moment;
        }
        let direct = twisted_product(&phi, coupling).unwrap();
        assert!(
            ((series - direct) / direct).abs() <= 1e-5,
            "even-moment series should rebuild the twisted product: {series} vs {direct}"
        );
    }

    #[test]
    fn half_space_sinh_matches_its_series_and_closed_form() {
        // Independent oracle: expanding sinh termwise against the Gaussian
        // weight gives sum_j ((2j)!!)^2 rho^{2j+1} / (2j+1)!, with term
        // ratio (2j+2) rho^2 / (2j+3).
        let coupling = 0.5f64;
        let mut series = 0.0;
        let mut term = coupling;
        for j in 0..60u32 {
            series += term;
            term *= (2 * j + 2) as f64 * coupling * coupling / (2 * j + 3) as f64;
        }
        let closed = half_space_sinh_bound(coupling);
        assert!(
            (series - closed).abs() <= 1e-12,
            "series oracle and closed form disagree: {series} vs {closed}"
        );
        assert!(
            (closed - 0.604600).abs() <= 1e-4,
            "closed form at coupling 1/2 should be about 0.604600, got {closed}"
        );
        let phi = GridFunction::standard_gaussian(1).unwrap();
        let got = half_space_sinh(&phi, coupling).unwrap();
        assert!(
            (got - closed).abs() <= 1e-4,
            "grid pairing strays from the Gaussian value: {got} vs {closed}"
        );
    }

    #[test]
    fn half_space_sinh_vanishes_at_zero_coupling() {
        let phi = GridFunction::standard_gaussian(1).unwrap();
        let got = half_space_sinh(&phi, 0.0).unwrap();
        assert_eq!(got, 0.0, "zero coupling must give exactly zero");
    }

    #[test]
    fn quartic_half_space_sinh_sits_strictly_below_the_gaussian_value() {
        let phi = GridFunction::power(1, 4.0).unwrap();
        let got = half_space_sinh(&phi, 0.5).unwrap();
        let gaussian = half_space_sinh_bound(0.5);
        assert!(
            got < gaussian * (1.0 - 5e-3),
            "quartic well must fall below the Gaussian pairing: {got} vs {gaussian}"
        );
        assert!(got > 0.2 * gaussian, "pairing implausibly small: {got}");
    }

    #[test]
    fn half_space_sinh_requires_one_dimension() {
        let phi = GridFunction::standard_gaussian(2).unwrap();
        assert!(matches!(
            half_space_sinh(&phi, 0.5),
            Err(FunctionalError::InvalidInput(_))
        ));
    }

    #[test]
    fn grid_validation_rejects_malformed_data() {
        assert!(matches!(
            GridFunction::new(3, 8.0, 16, vec![0.0; 16]),
            Err(FunctionalError::InvalidGrid(_))
        ));
        assert!(matches!(
            GridFunction::new(1, 8.0, 16, vec![0.0; 15]),
            Err(FunctionalError::InvalidGrid(_))
        ));
        assert!(matches!(
            GridFunction::new(1, -1.0, 16, vec![0.0; 16]),
            Err(FunctionalError::InvalidGrid(_))
        ));
        assert!(matches!(
            GridFunction::new(1, 8.0, 16, vec![f64::NAN; 16]),
            Err(FunctionalError::InvalidGrid(_))
        ));
        assert!(matches!(
            GridFunction::new(1, 8.0, 16, vec![f64::NEG_INFINITY; 16]),
            Err(FunctionalError::InvalidGrid(_))
        ));
        assert!(matches!(
            GridFunction::new(1, 8.0, 16, vec![f64::INFINITY; 16]),
            Err(FunctionalError::InvalidGrid(_))
        ));
        assert!(GridFunction::new(1, 8.0, 16, vec![1.0; 16]).is_ok());

        assert!(matches!(
            GaussianSpec::new(1, &[-2.0], 0.0),
            Err(FunctionalError::InvalidInput(_))
        ));
        assert!(matches!(
            GaussianSpec::new(2, &[1.0, 0.5, -0.5, 1.0], 0.0),
            Err(FunctionalError::InvalidInput(_))
        ));
        assert!(matches!(
            GaussianSpec::new(2, &[1.0, 2.0, 2.0, 1.0], 0.0),
            Err(FunctionalError::InvalidInput(_))
        ));
        assert!(matches!(
            GaussianSpec::new(2, &[1.0, 0.0, 0.0], 0.0),
            Err(FunctionalError::InvalidInput(_))
        ));
    }

    #[test]
    fn gaussian_spec_sampling_matches_the_quadratic_form() {
        let spec = GaussianSpec::new(2, &[2.0, 0.0, 0.0, 0.5], 1.0).unwrap();
        let grid = spec.sample(4.0, 33).unwrap();
        let nodes = grid.nodes();
        let res = grid.resolution();
        let (x, y) = (nodes[20], nodes[7]);
        let got = grid.values()[20 * res + 7];
        let want = x * x + 0.25 * y * y + 1.0;
        assert!(
            (got - want).abs() <= 1e-12,
            "sampled quadratic form wrong at ({x}, {y}): {got} vs {want}"
        );
    }
}
