//! Scalar abstraction: the floating-point type the numerics run on.
//!
//! `f64` is the working precision; `f32` routes its special functions
//! through `f64` and is intended for the scalar-agnostic core math only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating point scalar with the few special functions the crate needs.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Standard normal CDF Φ(x).
    fn norm_cdf(self) -> Self;

    /// log Φ(x), stable for large negative arguments.
    fn ln_norm_cdf(self) -> Self;

    /// log Γ(x).
    fn ln_gamma(self) -> Self;

    /// One draw from N(0, 1).
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U(0, 1).
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

/// Shorthand for lifting an `f64` constant into the scalar type.
#[inline]
pub fn c<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}

/// ln(2π).
#[inline]
pub fn ln_two_pi<T: Scalar>() -> T {
    c(1.837_877_066_409_345_6_f64)
}

fn ln_norm_cdf_f64(x: f64) -> f64 {
    if x > -30.0 {
        let p = 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
        return p.ln();
    }
    // Asymptotic expansion of ln Φ(x) for x << 0:
    // Φ(x) = φ(x)/(-x) (1 - 1/x² + 3/x⁴ - 15/x⁶ + 105/x⁸ ...)
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)
        + 105.0 / (x2 * x2 * x2 * x2);
    -0.5 * x2 - 0.5 * (2.0 * std::f64::consts::PI).ln() - (-x).ln() + series.ln()
}

impl Scalar for f64 {
    #[inline]
    fn norm_cdf(self) -> Self {
        0.5 * statrs::function::erf::erfc(-self / std::f64::consts::SQRT_2)
    }

    fn ln_norm_cdf(self) -> Self {
        ln_norm_cdf_f64(self)
    }

    #[inline]
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self)
    }

    #[inline]
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Scalar for f32 {
    #[inline]
    fn norm_cdf(self) -> Self {
        (self as f64).norm_cdf() as f32
    }

    fn ln_norm_cdf(self) -> Self {
        ln_norm_cdf_f64(self as f64) as f32
    }

    #[inline]
    fn ln_gamma(self) -> Self {
        statrs::function::gamma::ln_gamma(self as f64) as f32
    }

    #[inline]
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}
