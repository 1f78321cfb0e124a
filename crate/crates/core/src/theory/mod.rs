//! Executable numerics for the limiting theory of the particle Langevin
//! algorithm: closed-form acceptance rates for the three gradient-error
//! regimes, the efficiency surface and its optimum, roughness constants by
//! quadrature, the maximin acceptance rate, and a product-target simulator
//! that verifies the limits empirically.

mod maximin;
mod simulate;

pub use maximin::{maximin_acceptance, MaximinConfig, MaximinResult};
pub use simulate::{simulate_limit, GradientErrorModel, LimitSimResult, ProductTarget};

use crate::error::{Error, Result};
use crate::quad::integrate_real_line;
use crate::scalar::{c, Scalar};

/// Roughness constants of a limiting regime.
///
/// `k` measures the target's own roughness, `kstar2` the squared scale of
/// the gradient-error bias/noise, and `kstarstar` the bias–curvature
/// interaction (may be negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roughness<T> {
    pub k: T,
    pub kstar2: T,
    pub kstarstar: T,
}

impl<T: Scalar> Roughness<T> {
    pub fn new(k: T, kstar2: T, kstarstar: T) -> Result<Self> {
        if !(k > T::zero()) || !k.is_finite() {
            return Err(Error::domain(format!("roughness K must be positive, got {k}")));
        }
        if kstar2 < T::zero() || !kstar2.is_finite() {
            return Err(Error::domain(format!("K*² must be nonnegative, got {kstar2}")));
        }
        if !kstarstar.is_finite() {
            return Err(Error::non_finite("K**"));
        }
        Ok(Roughness {
            k,
            kstar2,
            kstarstar,
        })
    }

    /// The Cauchy–Schwarz feasibility bound K**² ≤ K*² K², which guarantees
    /// the acceptance polynomial is nonnegative for every step size.
    pub fn is_feasible(&self) -> bool {
        self.kstarstar * self.kstarstar <= self.kstar2 * self.k * self.k
    }
}

/// A limiting regime: gradient-error decay exponent κ, roughness constants,
/// and the log-target noise variance σ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeSpec<T> {
    pub kappa: T,
    pub roughness: Roughness<T>,
    pub sigma2: T,
}

impl<T: Scalar> RegimeSpec<T> {
    pub fn new(kappa: T, roughness: Roughness<T>, sigma2: T) -> Result<Self> {
        if kappa < T::zero() || !kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be >= 0, got {kappa}")));
        }
        if sigma2 < T::zero() || !sigma2.is_finite() {
            return Err(Error::domain(format!("sigma² must be >= 0, got {sigma2}")));
        }
        Ok(RegimeSpec {
            kappa,
            roughness,
            sigma2,
        })
    }

    /// The regime case boundary κ = 1/3.
    fn kappa_third() -> T {
        T::one() / c(3.0)
    }

    /// The λ-polynomial v(ℓ) whose value enters 2Φ(−½√(v + 2σ²)).
    pub fn acceptance_polynomial(&self, ell: T) -> Result<T> {
        if !(ell > T::zero()) {
            return Err(Error::domain(format!("step scale ell must be positive, got {ell}")));
        }
        let r = &self.roughness;
        let l2 = ell * ell;
        let third = Self::kappa_third();
        let v = if self.kappa < third {
            l2 * r.kstar2
        } else if self.kappa > third {
            l2 * l2 * l2 * r.k * r.k
        } else {
            l2 * l2 * l2 * r.k * r.k
                + c::<T>(2.0) * l2 * l2 * r.kstarstar
                + l2 * r.kstar2
        };
        if v < T::zero() {
            return Err(Error::domain(format!(
                "acceptance polynomial is negative ({v}) at ell = {ell}; the roughness \
                 constants violate the feasibility bound"
            )));
        }
        Ok(v)
    }
}

/// E(1 ∧ e^U) for U ~ N(a, b²): Φ(a/b) + e^{a + b²/2} Φ(−b − a/b).
/// With b = 0 this is min(1, e^a).
pub fn gaussian_min_exp_moment<T: Scalar>(a: T, b: T) -> T {
    assert!(b >= T::zero(), "gaussian_min_exp_moment needs b >= 0");
    if b == T::zero() {
        return T::one().min(a.exp());
    }
    let r = a / b;
    let term1 = r.norm_cdf();
    // exp(a + b²/2) Φ(−b − a/b) in log space; the product is ≤ 1 even when
    // the exponential factor alone overflows.
    let ln_term2 = a + b * b / c(2.0) + (-b - r).ln_norm_cdf();
    term1 + ln_term2.exp()
}

/// Limiting expected acceptance rate of the regime at step scale ℓ:
/// 2Φ(−½ √(v(ℓ) + 2σ²)).
pub fn limiting_acceptance<T: Scalar>(regime: &RegimeSpec<T>, ell: T) -> Result<T> {
    let v = regime.acceptance_polynomial(ell)?;
    let arg = -c::<T>(0.5) * (v + c::<T>(2.0) * regime.sigma2).sqrt();
    Ok(c::<T>(2.0) * arg.norm_cdf())
}

/// The same acceptance rate through the Gaussian min-exp moment: the limit
/// of the log MH ratio is N(−½(v + 2σ²), v + 2σ²), so the acceptance is
/// E(1 ∧ e^U) of that law. Algebraically identical to
/// [`limiting_acceptance`]; kept as an independent code path.
pub fn limiting_acceptance_via_moment<T: Scalar>(regime: &RegimeSpec<T>, ell: T) -> Result<T> {
    let v = regime.acceptance_polynomial(ell)?;
    let total = v + c::<T>(2.0) * regime.sigma2;
    Ok(gaussian_min_exp_moment(-total / c(2.0), total.sqrt()))
}

/// Efficiency Eff(ℓ, σ²) = σ² ℓ² α(ℓ, σ²) (computing-time-adjusted expected
/// squared jump distance, up to a constant).
pub fn efficiency<T: Scalar>(regime: &RegimeSpec<T>, ell: T) -> Result<T> {
    Ok(regime.sigma2 * ell * ell * limiting_acceptance(regime, ell)?)
}

/// Jointly optimal tuning of the idealized particle Langevin algorithm for
/// a target with roughness K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTuning<T> {
    pub ell: T,
    pub sigma2: T,
    pub alpha: T,
    /// The inner maximizer â of a^{8/3} Φ(−a).
    pub a_hat: T,
}

/// Maximizes Eff over (ℓ, σ²) for regime 3 with roughness K: with
/// a = Kℓ³ and b² = 2σ², the efficiency is ∝ a^{2/3} b² Φ(−½√(a²+b²)),
/// maximized at b² = 3a² and then over a^{8/3}Φ(−a).
pub fn optimal_params<T: Scalar>(k: T) -> Result<OptimalTuning<T>> {
    if !(k > T::zero()) {
        return Err(Error::domain(format!("roughness K must be positive, got {k}")));
    }
    let h = |a: T| a.powf(c::<T>(8.0) / c(3.0)) * (-a).norm_cdf();
    let a_hat = golden_max(h, c(0.2), c(4.0), c(1e-13));
    let ell = (a_hat / k).powf(T::one() / c(3.0));
    let sigma2 = c::<T>(1.5) * a_hat * a_hat;
    let alpha = c::<T>(2.0) * (-a_hat).norm_cdf();
    Ok(OptimalTuning {
        ell,
        sigma2,
        alpha,
        a_hat,
    })
}

/// Golden-section maximization of a unimodal function on [lo, hi].
pub(crate) fn golden_max<T: Scalar>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> T {
    let inv_phi = c::<T>(0.618_033_988_749_894_8);
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol * (T::one() + a.abs() + b.abs()) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    (a + b) / c(2.0)
}

/// Roughness constants of a normalized 1-D log-density g (with derivatives
/// g″, g‴) and a gradient-error model (bias b with derivative b′, noise τ):
///
/// ```text
/// K   = [E{5 g‴(X)² − 3 g″(X)³} / 48]^{1/2}
/// K*² = E{b(X)²} + τ²/2
/// K** = −E{b′(X) g″(X)} / 4
/// ```
///
/// Expectations are over f = e^g by adaptive quadrature on the real line.
#[allow(clippy::too_many_arguments)]
pub fn roughness_from_density<T, G, G2, G3, B, B1>(
    g: G,
    g2: G2,
    g3: G3,
    bias: B,
    bias_deriv: B1,
    tau: T,
) -> Result<Roughness<T>>
where
    T: Scalar,
    G: Fn(T) -> T,
    G2: Fn(T) -> T,
    G3: Fn(T) -> T,
    B: Fn(T) -> T,
    B1: Fn(T) -> T,
{
    if tau < T::zero() {
        return Err(Error::domain("gradient noise scale tau must be >= 0"));
    }
    let tol = c::<T>(1e-10);
    let five = c::<T>(5.0);
    let three = c::<T>(3.0);
    let k2_raw = integrate_real_line(
        |x| {
            let gg2 = g2(x);
            let gg3 = g3(x);
            (five * gg3 * gg3 - three * gg2 * gg2 * gg2) * g(x).exp()
        },
        tol,
    )? / c(48.0);
    if k2_raw <= T::zero() {
        return Err(Error::domain(format!(
            "E(5 g'''² − 3 g''³)/48 must be positive, got {k2_raw}"
        )));
    }
    let eb2 = integrate_real_line(|x| bias(x) * bias(x) * g(x).exp(), tol)?;
    let kstar2 = eb2 + tau * tau / c(2.0);
    let kstarstar =
        -integrate_real_line(|x| bias_deriv(x) * g2(x) * g(x).exp(), tol)? / c(4.0);
    Roughness::new(k2_raw.sqrt(), kstar2, kstarstar)
}

/// Standard Gaussian log-density and derivatives, the reference target for
/// the theory checks.
pub mod std_gaussian {
    use crate::scalar::{c, ln_two_pi, Scalar};

    pub fn logpdf<T: Scalar>(x: T) -> T {
        -x * x / c(2.0) - ln_two_pi::<T>() / c(2.0)
    }

    pub fn d2<T: Scalar>(_x: T) -> T {
        -T::one()
    }

    pub fn d3<T: Scalar>(_x: T) -> T {
        T::zero()
    }
}
