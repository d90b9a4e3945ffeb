//! Richardson extrapolation of a sequence (epsilon, value) to epsilon = 0.

use super::NumericsError;

/// Outcome of a Richardson extrapolation.
#[derive(Debug, Clone, Copy)]
pub struct RichardsonResult {
    /// Extrapolated limit at epsilon = 0.
    pub value: f64,
    /// Internal consistency estimate: absolute spread between the last
    /// two extrapolation columns.
    pub spread: f64,
    /// False when successive sample differences fail to shrink as
    /// epsilon does, signalling that the assumed error model does not
    /// fit.
    pub reliable: bool,
}

/// Extrapolates samples `(epsilon_i, v_i)` to the limit `epsilon -> 0`
/// assuming an error expansion starting at `epsilon^order` with integer
/// power steps.
///
/// At least three samples at geometrically spaced, strictly positive
/// epsilon are required. Polynomial (Neville) extrapolation in
/// `epsilon^order` is exact whenever the samples follow
/// `v = L + c_1 eps^order + c_2 eps^(2 order) + ...` up to one term per
/// sample; for `order = 1` this covers every smooth error model.
pub fn richardson_limit(
    samples: &[(f64, f64)],
    order: u32,
) -> Result<RichardsonResult, NumericsError> {
    if samples.len() < 3 {
        return Err(NumericsError::InvalidInput(format!(
            "richardson_limit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if order == 0 {
        return Err(NumericsError::InvalidInput(
            "richardson_limit needs order >= 1".into(),
        ));
    }
    let mut pts: Vec<(f64, f64)> = samples.to_vec();
    pts.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap_or(std::cmp::Ordering::Equal));
    for w in pts.windows(2) {
        let (e0, e1) = (w[0].0, w[1].0);
        if !(e0 > 0.0) || !(e1 > 0.0) {
            return Err(NumericsError::InvalidInput(
                "richardson_limit needs strictly positive epsilon".into(),
            ));
        }
        let ratio = e1 / e0;
        if !(ratio > 0.05 && ratio < 0.97) {
            return Err(NumericsError::InvalidInput(format!(
                "epsilon values must decrease geometrically; adjacent ratio {ratio} outside (0.05, 0.97)"
            )));
        }
    }

    // Neville tableau in x = eps^order evaluated at x = 0.
    let xs: Vec<f64> = pts.iter().map(|p| p.0.powi(order as i32)).collect();
    let mut col: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let n = col.len();
    let mut prev_last = col[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let x0 = xs[i];
            let x1 = xs[i + level];
            col[i] = (x0 * col[i + 1] - x1 * col[i]) / (x0 - x1);
        }
        if level == n - 2 {
            prev_last = col[0];
        }
    }
    let value = col[0];
    let spread = (value - prev_last).abs();

    // For a converging family the successive differences shrink
    // roughly geometrically; growth flags a broken error model.
    let scale = pts.iter().map(|p| p.1.abs()).fold(value.abs(), f64::max);
    let slack = 1e-12 * scale.max(1e-300);
    let mut reliable = true;
    let mut prev_diff = f64::INFINITY;
    for w in pts.windows(2) {
        let diff = (w[1].1 - w[0].1).abs();
        if diff > prev_diff * 1.2 + slack {
            reliable = false;
        }
        prev_diff = diff;
    }

    Ok(RichardsonResult { value, spread, reliable })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_linear_model() {
        let samples = [(0.4, 1.4), (0.2, 1.2), (0.1, 1.1)];
        let r = richardson_limit(&samples, 1).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "got {}", r.value);
        assert!(r.reliable);
    }

    #[test]
    fn exact_on_constant() {
        let samples = [(0.4, 5.0), (0.2, 5.0), (0.1, 5.0)];
        let r = richardson_limit(&samples, 1).unwrap();
        assert!((r.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_two_pi_squared_from_quadratic_model() {
        // Oracle: the model L + 0.3 eps + 0.05 eps^2 evaluated exactly.
        let limit = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        let v = |e: f64| limit + 0.3 * e + 0.05 * e * e;
        let samples = [(0.2, v(0.2)), (0.1, v(0.1)), (0.05, v(0.05))];
        let r = richardson_limit(&samples, 1).unwrap();
        assert!(
            (r.value - limit).abs() < 1e-6,
            "got {}, want {limit}",
            r.value
        );
        assert!(r.reliable);
    }

    #[test]
    fn flags_oscillating_residuals() {
        let samples = [(0.4, 1.0), (0.2, 3.0), (0.1, 0.5), (0.05, 2.5)];
        let r = richardson_limit(&samples, 1).unwrap();
        assert!(!r.reliable);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(richardson_limit(&[(0.2, 1.0), (0.1, 1.0)], 1).is_err());
        assert!(richardson_limit(&[(0.2, 1.0), (0.1, 1.0), (0.05, 1.0)], 0).is_err());
        assert!(richardson_limit(&[(0.2, 1.0), (-0.1, 1.0), (0.05, 1.0)], 1).is_err());
        assert!(richardson_limit(&[(0.2, 1.0), (0.199, 1.0), (0.05, 1.0)], 1).is_err());
    }

    #[test]
    fn order_two_even_expansion() {
        let v = |e: f64| 7.0 + 2.0 * e * e + 0.3 * e * e * e * e;
        let samples = [(0.4, v(0.4)), (0.2, v(0.2)), (0.1, v(0.1))];
        let r = richardson_limit(&samples, 2).unwrap();
        assert!((r.value - 7.0).abs() < 1e-10, "got {}", r.value);
    }
}
