//! Trigonometric interpolation of periodic samples on a uniform grid.

use std::cell::RefCell;

use rustfft::{num_complex::Complex, FftPlanner};

thread_local! {
    // FftPlanner caches plans per length; reusing one planner avoids
    // re-deriving the plan on every fit.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A real trigonometric polynomial `f(t) = sum_k a_k cos(kt) + b_k sin(kt)`
/// interpolating `N` uniform samples on `[0, 2 pi)`.
///
/// Evaluation anywhere is spectrally accurate for smooth periodic data
/// and exact at the sample nodes; first and second derivatives come
/// from term-wise differentiation of the symmetric interpolant.
#[derive(Debug, Clone)]
pub struct TrigSeries {
    /// Cosine coefficients, index 0..=N/2.
    a: Vec<f64>,
    /// Sine coefficients, same indexing (entries 0 and N/2 are zero).
    b: Vec<f64>,
    n: usize,
}

impl TrigSeries {
    /// Interpolates `samples[j] = f(2 pi j / N)`. `N` must be even and
    /// at least 4.
    pub fn fit(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 4 && n % 2 == 0, "need an even sample count >= 4, got {n}");
        let mut buf: Vec<Complex<f64>> =
            samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
        fft.process(&mut buf);
        let m = n / 2;
        let scale = 1.0 / n as f64;
        let mut a = vec![0.0; m + 1];
        let mut b = vec![0.0; m + 1];
        a[0] = buf[0].re * scale;
        for k in 1..m {
            a[k] = 2.0 * buf[k].re * scale;
            b[k] = -2.0 * buf[k].im * scale;
        }
        a[m] = buf[m].re * scale;
        TrigSeries { a, b, n }
    }

    /// Builds the series from explicit coefficients `(a_0, a_1, b_1,
    /// a_2, b_2, ...)`, zero-padded to the requested sample count.
    pub fn from_interleaved(coeffs: &[f64], n: usize) -> Self {
        assert!(n >= 4 && n % 2 == 0);
        let m = n / 2;
        let mut a = vec![0.0; m + 1];
        let mut b = vec![0.0; m + 1];
        if !coeffs.is_empty() {
            a[0] = coeffs[0];
        }
        let mut k = 1;
        let mut i = 1;
        while i < coeffs.len() && k <= m {
            a[k] = coeffs[i];
            if i + 1 < coeffs.len() {
                b[k] = coeffs[i + 1];
            }
            i += 2;
            k += 1;
        }
        TrigSeries { a, b, n }
    }

    /// Number of samples the series was fitted from.
    pub fn sample_count(&self) -> usize {
        self.n
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivs(t).0
    }

    /// Value, first and second derivative at `t`.
    pub fn eval_with_derivs(&self, t: f64) -> (f64, f64, f64) {
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (0.0_f64, 1.0_f64);
        let (mut f, mut fp, mut fpp) = (self.a[0], 0.0, 0.0);
        for k in 1..self.a.len() {
            let c_next = ck * c1 - sk * s1;
            let s_next = sk * c1 + ck * s1;
            ck = c_next;
            sk = s_next;
            let (ak, bk) = (self.a[k], self.b[k]);
            let kf = k as f64;
            let val = ak * ck + bk * sk;
            f += val;
            fp += kf * (bk * ck - ak * sk);
            fpp -= kf * kf * val;
        }
        (f, fp, fpp)
    }

    /// Resamples the interpolant on a uniform grid of `n` points.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let step = 2.0 * std::f64::consts::PI / n as f64;
        (0..n).map(|j| self.eval(j as f64 * step)).collect()
    }

    /// One half of `∮ (f^2 - f'^2) dt` over the period, evaluated
    /// term-wise by Parseval: the area enclosed by a convex curve whose
    /// support function is `f`.
    pub fn enclosed_area(&self) -> f64 {
        let mut acc = 2.0 * self.a[0] * self.a[0];
        for k in 1..self.a.len() {
            let kf = k as f64;
            acc += (1.0 - kf * kf) * (self.a[k] * self.a[k] + self.b[k] * self.b[k]);
        }
        0.5 * std::f64::consts::PI * acc
    }
}
