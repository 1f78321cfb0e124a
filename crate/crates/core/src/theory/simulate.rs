//! Finite-dimensional simulation of the limiting regimes on a product
//! target: draws a stationary state, proposes with the regime-scaled
//! Langevin step (including gradient bias and noise), evaluates the exact
//! Metropolis–Hastings log ratio component by component, and injects the
//! stationary log-likelihood-noise pair (W, V).

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};

type ScalarFn<T> = Box<dyn Fn(T) -> T + Send + Sync>;
type SamplerFn<T> = Box<dyn Fn(&mut dyn RngCore) -> T + Send + Sync>;

/// 1-D log-density with gradient and an exact sampler, defining the
/// product target Π f(x_i).
pub struct ProductTarget<T> {
    pub logpdf: ScalarFn<T>,
    pub grad: ScalarFn<T>,
    pub sampler: SamplerFn<T>,
}

impl<T: Scalar> ProductTarget<T> {
    pub fn new(logpdf: ScalarFn<T>, grad: ScalarFn<T>, sampler: SamplerFn<T>) -> Self {
        ProductTarget {
            logpdf,
            grad,
            sampler,
        }
    }

    /// Standard Gaussian components.
    pub fn standard_gaussian() -> Self {
        ProductTarget {
            logpdf: Box::new(|x: T| crate::theory::std_gaussian::logpdf(x)),
            grad: Box::new(|x: T| -x),
            sampler: Box::new(|rng: &mut dyn RngCore| T::sample_std_normal(rng)),
        }
    }
}

/// Per-component gradient-error model: the estimated gradient of component
/// i is g'(x_i) + n^{-κ} (b(x_i) + τ U) with E(U) = 0, var(U) = 1.
pub struct GradientErrorModel<T> {
    kappa: T,
    bias: ScalarFn<T>,
    tau: T,
    noise: Option<SamplerFn<T>>,
}

impl<T: Scalar> GradientErrorModel<T> {
    /// Registers the model. When a noise sampler is supplied its first two
    /// moments are checked empirically (10⁵ draws, three standard errors).
    pub fn new<R: Rng>(
        kappa: T,
        bias: ScalarFn<T>,
        tau: T,
        noise: Option<SamplerFn<T>>,
        rng: &mut R,
    ) -> Result<Self> {
        if kappa < T::zero() || !kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be >= 0, got {kappa}")));
        }
        if tau < T::zero() || !tau.is_finite() {
            return Err(Error::domain(format!("tau must be >= 0, got {tau}")));
        }
        if tau > T::zero() && noise.is_none() {
            return Err(Error::Config(
                "a noise sampler is required when tau > 0".into(),
            ));
        }
        if let Some(sampler) = &noise {
            check_noise_moments(sampler.as_ref(), rng)?;
        }
        Ok(GradientErrorModel {
            kappa,
            bias,
            tau,
            noise,
        })
    }

    /// Pure bias (τ = 0).
    pub fn bias_only<R: Rng>(kappa: T, bias: ScalarFn<T>, rng: &mut R) -> Result<Self> {
        Self::new(kappa, bias, T::zero(), None, rng)
    }

    /// Exact gradient (b = 0, τ = 0).
    pub fn none() -> Self {
        GradientErrorModel {
            kappa: T::one(),
            bias: Box::new(|_| T::zero()),
            tau: T::zero(),
            noise: None,
        }
    }

    /// Standard Gaussian gradient noise of scale τ.
    pub fn gaussian_noise<R: Rng>(
        kappa: T,
        bias: ScalarFn<T>,
        tau: T,
        rng: &mut R,
    ) -> Result<Self> {
        Self::new(
            kappa,
            bias,
            tau,
            Some(Box::new(|rng: &mut dyn RngCore| T::sample_std_normal(rng))),
            rng,
        )
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }
}

fn check_noise_moments<T: Scalar, R: Rng>(
    sampler: &(dyn Fn(&mut dyn RngCore) -> T + Send + Sync),
    rng: &mut R,
) -> Result<()> {
    let n = 100_000usize;
    let mut sum = T::zero();
    let mut sum2 = T::zero();
    let mut sum4 = T::zero();
    let mut dyn_rng: &mut dyn RngCore = rng;
    for _ in 0..n {
        let u = sampler(&mut dyn_rng);
        sum += u;
        sum2 += u * u;
        sum4 += u * u * u * u;
    }
    let nt = c::<T>(n as f64);
    let mean = sum / nt;
    let m2 = sum2 / nt;
    let var = m2 - mean * mean;
    let se_mean = (var / nt).sqrt();
    if mean.abs() > c::<T>(3.0) * se_mean {
        return Err(Error::domain(format!(
            "noise sampler mean {mean} is not 0 (3 SE = {})",
            c::<T>(3.0) * se_mean
        )));
    }
    let m4 = sum4 / nt;
    let se_var = ((m4 - var * var).max(T::zero()) / nt).sqrt();
    if (var - T::one()).abs() > c::<T>(3.0) * se_var {
        return Err(Error::domain(format!(
            "noise sampler variance {var} is not 1 (3 SE = {})",
            c::<T>(3.0) * se_var
        )));
    }
    Ok(())
}

/// Result of a limit simulation.
#[derive(Debug, Clone, Copy)]
pub struct LimitSimResult<T> {
    /// Mean acceptance probability E(1 ∧ e^ratio) over replicates.
    pub acceptance: T,
    /// Mean squared proposal jump weighted by the acceptance probability,
    /// divided by n^{2 min(κ, 1/3)}; converges to ℓ²α(ℓ).
    pub scaled_esjd: T,
    /// Replicates dropped because the log target was non-finite at the
    /// proposal.
    pub rejected_replicates: usize,
    /// The step size λ_n that was used.
    pub lambda_n: T,
}

/// The regime-correct step size: λ_n = ℓ n^{κ−1/2} for κ < 1/3 and
/// λ_n = ℓ n^{-1/6} otherwise.
pub fn regime_lambda<T: Scalar>(ell: T, kappa: T, n: usize) -> T {
    let third = T::one() / c(3.0);
    let nf = c::<T>(n as f64);
    if kappa < third {
        ell * nf.powf(kappa - c(0.5))
    } else {
        ell * nf.powf(-T::one() / c(6.0))
    }
}

/// Simulates the proposal/acceptance experiment at dimension n.
#[allow(clippy::too_many_arguments)]
pub fn simulate_limit<T: Scalar, R: Rng>(
    n: usize,
    ell: T,
    sigma2: T,
    error: &GradientErrorModel<T>,
    target: &ProductTarget<T>,
    reps: usize,
    rng: &mut R,
) -> Result<LimitSimResult<T>> {
    if n == 0 || reps == 0 {
        return Err(Error::Config("need n >= 1 and reps >= 1".into()));
    }
    if !(ell > T::zero()) || sigma2 < T::zero() {
        return Err(Error::domain("need ell > 0 and sigma2 >= 0"));
    }
    let lambda = regime_lambda(ell, error.kappa, n);
    let half = c::<T>(0.5);
    let nf = c::<T>(n as f64);
    let err_scale = nf.powf(-error.kappa);
    let sigma = sigma2.sqrt();
    let third = T::one() / c(3.0);
    let esjd_norm = nf.powf(c::<T>(2.0) * error.kappa.min(third));

    let mut x = vec![T::zero(); n];
    let mut acc_sum = T::zero();
    let mut esjd_sum = T::zero();
    let mut rejected = 0usize;

    for _ in 0..reps {
        for xi in x.iter_mut() {
            *xi = (target.sampler)(rng);
        }
        let w = if sigma2 > T::zero() {
            half * sigma2 + sigma * T::sample_std_normal(rng)
        } else {
            T::zero()
        };
        let v = if sigma2 > T::zero() {
            -half * sigma2 + sigma * T::sample_std_normal(rng)
        } else {
            T::zero()
        };
        let mut log_ratio = v - w;
        let mut sq_jump = T::zero();
        let mut ok = true;
        for &xi in &x {
            let z = T::sample_std_normal(rng);
            let gx = {
                let noise = match (&error.noise, error.tau > T::zero()) {
                    (Some(s), true) => error.tau * s(rng),
                    _ => T::zero(),
                };
                (target.grad)(xi) + err_scale * ((error.bias)(xi) + noise)
            };
            let yi = xi + lambda * z + half * lambda * lambda * gx;
            let gy = {
                let noise = match (&error.noise, error.tau > T::zero()) {
                    (Some(s), true) => error.tau * s(rng),
                    _ => T::zero(),
                };
                (target.grad)(yi) + err_scale * ((error.bias)(yi) + noise)
            };
            let ly = (target.logpdf)(yi);
            if !ly.is_finite() {
                ok = false;
                break;
            }
            // log f(y) − log f(x) + log q(y→x) − log q(x→y), where the
            // q-ratio collapses to ½z² − ½(z + λ(Gx+Gy)/2)².
            let shifted = z + half * lambda * (gx + gy);
            log_ratio += ly - (target.logpdf)(xi) + half * z * z - half * shifted * shifted;
            sq_jump += (yi - xi) * (yi - xi);
        }
        if !ok {
            rejected += 1;
            continue;
        }
        let acc = T::one().min(log_ratio.exp());
        acc_sum += acc;
        esjd_sum += acc * sq_jump;
    }
    let effective = reps - rejected;
    if effective == 0 {
        return Err(Error::DegenerateInput(
            "all limit-simulation replicates were rejected".into(),
        ));
    }
    let eff = c::<T>(effective as f64);
    Ok(LimitSimResult {
        acceptance: acc_sum / eff,
        scaled_esjd: esjd_sum / eff / esjd_norm,
        rejected_replicates: rejected,
        lambda_n: lambda,
    })
}
