//! Small statistical helpers shared across modules.

use crate::scalar::{c, ln_two_pi, Scalar};

/// log N(x; mean, sd²).
#[inline]
pub fn norm_logpdf<T: Scalar>(x: T, mean: T, sd: T) -> T {
    let z = (x - mean) / sd;
    -c::<T>(0.5) * (ln_two_pi::<T>() + z * z) - sd.ln()
}

/// Numerically stable log Σ exp(v).
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let m = values.iter().cloned().fold(T::neg_infinity(), T::max);
    if !m.is_finite() {
        return m;
    }
    let s: T = values.iter().map(|&v| (v - m).exp()).sum();
    m + s.ln()
}

pub fn mean<T: Scalar>(values: &[T]) -> T {
    let n = c::<T>(values.len() as f64);
    values.iter().cloned().sum::<T>() / n
}

/// Unbiased sample variance (two-pass).
pub fn variance<T: Scalar>(values: &[T]) -> T {
    let n = values.len();
    assert!(n >= 2, "variance needs at least two values");
    let m = mean(values);
    let ss: T = values.iter().map(|&v| (v - m) * (v - m)).sum();
    ss / c::<T>((n - 1) as f64)
}

/// Sample skewness (g1, biased moment estimator).
pub fn skewness<T: Scalar>(values: &[T]) -> T {
    let m = mean(values);
    let n = c::<T>(values.len() as f64);
    let m2: T = values.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / n;
    let m3: T = values
        .iter()
        .map(|&v| (v - m) * (v - m) * (v - m))
        .sum::<T>()
        / n;
    m3 / m2.powf(c(1.5))
}

/// Sample excess kurtosis (g2, biased moment estimator).
pub fn excess_kurtosis<T: Scalar>(values: &[T]) -> T {
    let m = mean(values);
    let n = c::<T>(values.len() as f64);
    let m2: T = values.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / n;
    let m4: T = values
        .iter()
        .map(|&v| {
            let d = v - m;
            d * d * d * d
        })
        .sum::<T>()
        / n;
    m4 / (m2 * m2) - c(3.0)
}

/// Least-squares slope of y on x.
pub fn regression_slope<T: Scalar>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

/// Central finite difference of `f` at `x`, step scaled per coordinate.
///
/// Test-oracle helper: gradients in the crate are analytic; this exists to
/// check them.
pub fn central_difference<T: Scalar>(f: impl Fn(&[T]) -> T, x: &[T], rel_step: T) -> Vec<T> {
    let mut grad = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = rel_step * (T::one() + x[i].abs());
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        grad.push((fp - fm) / (c::<T>(2.0) * h));
    }
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_logpdf_standard_values() {
        // log N(0;0,1) = -ln sqrt(2π)
        assert!((norm_logpdf(0.0_f64, 0.0, 1.0) + 0.918_938_533_204_672_7).abs() < 1e-15);
        assert!((norm_logpdf(1.0_f64, 0.0, 1.0) + 1.418_938_533_204_672_7).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        let v = [-1000.0_f64, -1000.0];
        assert!((log_sum_exp(&v) - (-1000.0 + 2.0_f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
    }

    #[test]
    fn moments_of_known_sample() {
        let v = [1.0_f64, 2.0, 3.0, 4.0];
        assert!((mean(&v) - 2.5).abs() < 1e-15);
        assert!((variance(&v) - 5.0 / 3.0).abs() < 1e-15);
        assert!(skewness(&v).abs() < 1e-12);
    }

    #[test]
    fn slope_recovers_line() {
        let x = [1.0_f64, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        assert!((regression_slope(&x, &y) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn central_difference_of_quadratic() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1];
        let g = central_difference(f, &[2.0, 1.0], 1e-6);
        assert!((g[0] - 4.0).abs() < 1e-6);
        assert!((g[1] - 3.0).abs() < 1e-6);
    }
}
