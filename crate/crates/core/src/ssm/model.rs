//! The behavioral contract a state-space model exposes to the filter, the
//! score recursion and the MCMC kernels.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::ssm::ParameterTransform;

/// A point in the unconstrained parameter space ℝⁿ.
///
/// Every kernel, filter and estimator operates on these; constrained model
/// parameters are recovered through the model's [`ParameterTransform`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnconstrainedParams<T> {
    values: Vec<T>,
}

impl<T: Scalar> UnconstrainedParams<T> {
    /// All entries must be finite.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::non_finite(format!("parameter component {i}")));
        }
        Ok(UnconstrainedParams { values })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Observations z_{1:T}, stored row-major (T × n_z).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries<T> {
    data: Vec<T>,
    obs_dim: usize,
}

impl<T: Scalar> ObservationSeries<T> {
    pub fn new(data: Vec<T>, obs_dim: usize) -> Result<Self> {
        if obs_dim == 0 || data.is_empty() || data.len() % obs_dim != 0 {
            return Err(Error::Config(format!(
                "observation data length {} incompatible with dimension {obs_dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::non_finite("observation series"));
        }
        Ok(ObservationSeries { data, obs_dim })
    }

    /// Univariate series.
    pub fn from_scalars(values: Vec<T>) -> Result<Self> {
        Self::new(values, 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.obs_dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// Observation row at time index t (0-based).
    #[inline]
    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.obs_dim..(t + 1) * self.obs_dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.obs_dim)
    }
}

/// A state-space model: initial, transition and observation densities with
/// their parameter gradients, plus a prior on the unconstrained space.
///
/// `prepare` evaluates the transform once per parameter value; the returned
/// context is what the per-particle hot loops consume. Gradients are taken
/// with respect to the *unconstrained* parameters (transform chain rule
/// included) and written into caller-provided buffers of length
/// [`Self::n_params`]. Implementations are immutable after construction and
/// safe to share across threads.
pub trait StateSpaceModel<T: Scalar>: Send + Sync {
    /// Constrained parameters evaluated at one unconstrained point.
    type Ctx: Send + Sync;

    fn n_params(&self) -> usize;
    fn state_dim(&self) -> usize;
    fn obs_dim(&self) -> usize;

    fn transform(&self) -> &ParameterTransform<T>;

    /// Resolve an unconstrained point into evaluated constrained parameters.
    fn prepare(&self, x: &UnconstrainedParams<T>) -> Result<Self::Ctx>;

    /// Log prior on the unconstrained space, including the transform
    /// Jacobian. −∞ encodes zero prior mass.
    fn log_prior(&self, x: &UnconstrainedParams<T>) -> T;

    /// Gradient of [`Self::log_prior`]; only called where the prior is finite.
    fn grad_log_prior(&self, x: &UnconstrainedParams<T>) -> Vec<T>;

    fn init_logpdf(&self, ctx: &Self::Ctx, state: &[T]) -> T;
    fn transition_logpdf(&self, ctx: &Self::Ctx, prev: &[T], state: &[T]) -> T;
    fn observation_logpdf(&self, ctx: &Self::Ctx, state: &[T], obs: &[T]) -> T;

    fn sample_init<R: Rng + ?Sized>(&self, ctx: &Self::Ctx, rng: &mut R, out: &mut [T]);
    fn sample_transition<R: Rng + ?Sized>(
        &self,
        ctx: &Self::Ctx,
        prev: &[T],
        rng: &mut R,
        out: &mut [T],
    );

    /// ∇_x log μ_x(state), written to `out`.
    fn grad_init(&self, ctx: &Self::Ctx, state: &[T], out: &mut [T]);
    /// ∇_x log f_x(state | prev), written to `out`.
    fn grad_transition(&self, ctx: &Self::Ctx, prev: &[T], state: &[T], out: &mut [T]);
    /// ∇_x log g_x(obs | state), written to `out`.
    fn grad_observation(&self, ctx: &Self::Ctx, state: &[T], obs: &[T], out: &mut [T]);
}
