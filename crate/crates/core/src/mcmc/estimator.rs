//! Posterior estimators: how a kernel obtains (log π̂(x), ∇̂ log π(x)).
//!
//! The particle estimator runs the auxiliary filter once per call; a
//! degenerate filter is reported as log π̂ = −∞ (certain rejection), which
//! keeps the pseudo-marginal chain well defined. The Kalman estimator is the
//! exact reference for the linear Gaussian model, and the idealized
//! estimator pairs the noisy particle likelihood with the exact gradient.

use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::{run_apf, FilterSettings, ProposalAdapter, ResamplingScheme};
use crate::models::lgss::{kalman_loglik, kalman_score, LgssModel};
use crate::scalar::Scalar;
use crate::ssm::{ObservationSeries, StateSpaceModel, UnconstrainedParams};

/// One posterior evaluation. `log_post` includes the prior (with its
/// transform Jacobian); −∞ marks zero prior mass or a degenerate filter.
#[derive(Debug, Clone)]
pub struct PosteriorEstimate<T> {
    pub log_post: T,
    pub grad: Option<Vec<T>>,
}

impl<T: Scalar> PosteriorEstimate<T> {
    pub fn degenerate() -> Self {
        PosteriorEstimate {
            log_post: T::neg_infinity(),
            grad: None,
        }
    }
}

/// Source of posterior (and optionally gradient) estimates.
pub trait PosteriorEstimator<T: Scalar>: Send + Sync {
    fn estimate<R: Rng + ?Sized>(
        &self,
        x: &UnconstrainedParams<T>,
        want_grad: bool,
        rng: &mut R,
    ) -> Result<PosteriorEstimate<T>>;

    fn n_params(&self) -> usize;
}

/// Particle-filter estimator.
pub struct ParticleEstimator<'a, T: Scalar, M: StateSpaceModel<T>, A> {
    pub model: &'a M,
    pub data: &'a ObservationSeries<T>,
    pub adapter: A,
    pub n_particles: usize,
    pub zeta: T,
    pub resampling: ResamplingScheme,
}

impl<'a, T: Scalar, M: StateSpaceModel<T>, A> ParticleEstimator<'a, T, M, A> {
    pub fn new(
        model: &'a M,
        data: &'a ObservationSeries<T>,
        adapter: A,
        n_particles: usize,
        zeta: T,
    ) -> Self {
        ParticleEstimator {
            model,
            data,
            adapter,
            n_particles,
            zeta,
            resampling: ResamplingScheme::Multinomial,
        }
    }
}

impl<T, M, A> PosteriorEstimator<T> for ParticleEstimator<'_, T, M, A>
where
    T: Scalar,
    M: StateSpaceModel<T>,
    A: ProposalAdapter<T, M>,
{
    fn estimate<R: Rng + ?Sized>(
        &self,
        x: &UnconstrainedParams<T>,
        want_grad: bool,
        rng: &mut R,
    ) -> Result<PosteriorEstimate<T>> {
        let log_prior = self.model.log_prior(x);
        if log_prior == T::neg_infinity() {
            return Ok(PosteriorEstimate::degenerate());
        }
        if log_prior.is_nan() {
            return Err(Error::non_finite("log prior"));
        }
        let mut settings = FilterSettings::new(self.n_particles);
        settings.resampling = self.resampling;
        if want_grad {
            settings = settings.with_score(self.zeta);
        }
        match run_apf(self.model, x, self.data, &self.adapter, &settings, rng) {
            Ok(out) => {
                let grad = if want_grad {
                    let mut g = out.score.expect("score requested");
                    let gp = self.model.grad_log_prior(x);
                    for (gi, pi) in g.iter_mut().zip(gp) {
                        *gi += pi;
                    }
                    Some(g)
                } else {
                    None
                };
                Ok(PosteriorEstimate {
                    log_post: out.log_likelihood + log_prior,
                    grad,
                })
            }
            Err(Error::DegenerateFilter { .. }) => Ok(PosteriorEstimate::degenerate()),
            Err(e) => Err(e),
        }
    }

    fn n_params(&self) -> usize {
        self.model.n_params()
    }
}

/// Exact posterior for the linear Gaussian model via the Kalman filter.
pub struct KalmanEstimator<'a, T> {
    pub model: &'a LgssModel<T>,
    pub data: &'a ObservationSeries<T>,
}

impl<T: Scalar> PosteriorEstimator<T> for KalmanEstimator<'_, T> {
    fn estimate<R: Rng + ?Sized>(
        &self,
        x: &UnconstrainedParams<T>,
        want_grad: bool,
        _rng: &mut R,
    ) -> Result<PosteriorEstimate<T>> {
        let log_prior = self.model.log_prior(x);
        if log_prior == T::neg_infinity() {
            return Ok(PosteriorEstimate::degenerate());
        }
        let params = self.model.params_from_unconstrained(x)?;
        let ll = kalman_loglik(&params, self.data)?;
        let grad = if want_grad {
            let mut g = kalman_score(&params, self.data)?;
            for (gi, pi) in g.iter_mut().zip(self.model.grad_log_prior(x)) {
                *gi += pi;
            }
            Some(g)
        } else {
            None
        };
        Ok(PosteriorEstimate {
            log_post: ll + log_prior,
            grad,
        })
    }

    fn n_params(&self) -> usize {
        self.model.n_params()
    }
}

/// Idealized particle Langevin estimator: particle likelihood estimate,
/// exact Kalman gradient.
pub struct IdealizedLgssEstimator<'a, T: Scalar, A> {
    pub particle: ParticleEstimator<'a, T, LgssModel<T>, A>,
}

impl<T, A> PosteriorEstimator<T> for IdealizedLgssEstimator<'_, T, A>
where
    T: Scalar,
    A: ProposalAdapter<T, LgssModel<T>>,
{
    fn estimate<R: Rng + ?Sized>(
        &self,
        x: &UnconstrainedParams<T>,
        want_grad: bool,
        rng: &mut R,
    ) -> Result<PosteriorEstimate<T>> {
        let mut est = self.particle.estimate(x, false, rng)?;
        if want_grad && est.log_post.is_finite() {
            let params = self.particle.model.params_from_unconstrained(x)?;
            let mut g = kalman_score(&params, self.particle.data)?;
            for (gi, pi) in g.iter_mut().zip(self.particle.model.grad_log_prior(x)) {
                *gi += pi;
            }
            est.grad = Some(g);
        }
        Ok(est)
    }

    fn n_params(&self) -> usize {
        self.particle.model.n_params()
    }
}
