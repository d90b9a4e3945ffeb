//! Derivative-free scalar maximization and cyclic coordinate ascent.

/// Maximizes `f` on `[a, b]` by Brent's parabolic/golden-section search.
///
/// Returns `(x, f(x))`. Derivative-free; `tol` bounds the final
/// abscissa uncertainty.
pub fn maximize_scalar<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1; // 2 - golden ratio
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let mut x = lo + GOLD * (hi - lo);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        let tol1 = tol.max(f64::EPSILON * x.abs());
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // Parabola through x, v, w (on -f, so signs flipped).
            let r = (x - w) * (fx - fv);
            let q0 = (x - v) * (fx - fw);
            let mut p = (x - v) * q0 - (x - w) * r;
            let mut q = 2.0 * (q0 - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_old = e;
            e = d;
            if p.abs() < (0.5 * q * e_old).abs() && p > q * (lo - x) && p < q * (hi - x) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(m - x);
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { hi - x } else { lo - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu >= fx {
            if u < x {
                hi = x;
            } else {
                lo = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu >= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu >= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Cyclic coordinate ascent: repeatedly maximizes `f` in one coordinate
/// at a time inside a window of half-width `radius[i]` around the
/// current point.
///
/// Stops when a full sweep improves `f` by less than `f_tol` or after
/// `max_sweeps`. Returns the final objective value.
pub fn cyclic_ascent<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &mut [f64],
    radius: &[f64],
    x_tol: f64,
    f_tol: f64,
    max_sweeps: usize,
) -> f64 {
    assert_eq!(x.len(), radius.len(), "one window radius per coordinate");
    let mut best = f(x);
    for _ in 0..max_sweeps {
        let before = best;
        for i in 0..x.len() {
            let xi = x[i];
            let line = |t: f64| {
                let mut y = x.to_vec();
                y[i] = t;
                f(&y)
            };
            let (t, ft) = maximize_scalar(&line, xi - radius[i], xi + radius[i], x_tol);
            if ft > best {
                x[i] = t;
                best = ft;
            }
        }
        if best - before < f_tol {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_scalar_maximum_of_concave_quartic() {
        let f = |x: f64| -(x - 0.3).powi(2) - 0.5 * (x - 0.3).powi(4) + 2.0;
        let (x, fx) = maximize_scalar(&f, -2.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-8, "argmax {x}");
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn finds_maximum_of_sine() {
        let (x, fx) = maximize_scalar(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cyclic_ascent_on_coupled_quadratic() {
        // Maximum of -(x-1)^2 - (y+2)^2 - 0.5 (x-1)(y+2) at (1, -2).
        let f = |v: &[f64]| {
            let (a, b) = (v[0] - 1.0, v[1] + 2.0);
            -(a * a + b * b + 0.5 * a * b)
        };
        let mut x = [0.0, 0.0];
        let best = cyclic_ascent(&f, &mut x, &[3.0, 3.0], 1e-13, 1e-15, 200);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] + 2.0).abs() < 1e-6, "{x:?}");
        assert!(best.abs() < 1e-11);
    }
}
