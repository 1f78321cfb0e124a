//! Two-component mixture of autoregressive experts observed with noise:
//!
//! ```text
//! z_t = s_t + τ_ε ν_t,   s_t = ψ_J + φ_J s_{t-1} + σ_J η_t,  J_t ∈ {1, 2},
//! pr(J_t = 1 | s_{t-1}, s_{t-2}) = logistic(ξ₁ + ξ₂ s_{t-1} + ξ₃ (s_{t-1} − s_{t-2})),
//! ```
//!
//! with parameters (τ_ε, ψ₁, ψ₂, φ₁, φ₂, σ₁, σ₂, ξ₁, ξ₂, ξ₃) and the
//! identifiability constraint ψ₁(1−φ₁) < ψ₂(1−φ₂) (expert one is the
//! low-mean regime). Because the gate looks two steps back, the filter runs
//! on the augmented state u_t = (s_t, s_{t-1}).
//!
//! Both AR coefficients are kept in (−1, 1) (atanh coordinates), so each
//! expert has a stationary law; the latent chain starts from an equal-weight
//! mixture of the experts' stationary distributions with s_{-1} = s_0.
//! The prior is independent Gaussians directly on the unconstrained
//! coordinates (mean 0, sd 5 by default, overridable), truncated by the
//! identifiability constraint.

use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::ProposalAdapter;
use crate::scalar::{c, Scalar};
use crate::ssm::{
    ComponentTransform, ObservationSeries, ParameterTransform, StateSpaceModel,
    UnconstrainedParams,
};
use crate::stats::norm_logpdf;

pub const N_PARAMS: usize = 10;

pub const IDX_TAU: usize = 0;
pub const IDX_PSI1: usize = 1;
pub const IDX_PSI2: usize = 2;
pub const IDX_PHI1: usize = 3;
pub const IDX_PHI2: usize = 4;
pub const IDX_SIGMA1: usize = 5;
pub const IDX_SIGMA2: usize = 6;
pub const IDX_XI1: usize = 7;
pub const IDX_XI2: usize = 8;
pub const IDX_XI3: usize = 9;

/// Constrained parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureExpertsParams<T> {
    pub tau: T,
    pub psi: [T; 2],
    pub phi: [T; 2],
    pub sigma: [T; 2],
    pub xi: [T; 3],
}

impl<T: Scalar> MixtureExpertsParams<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(tau: T, psi: [T; 2], phi: [T; 2], sigma: [T; 2], xi: [T; 3]) -> Result<Self> {
        let p = MixtureExpertsParams {
            tau,
            psi,
            phi,
            sigma,
            xi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero()) || !(self.sigma[0] > T::zero()) || !(self.sigma[1] > T::zero())
        {
            return Err(Error::domain("noise standard deviations must be positive"));
        }
        if !(self.phi[0].abs() < T::one()) || !(self.phi[1].abs() < T::one()) {
            return Err(Error::domain("AR coefficients must satisfy |phi| < 1"));
        }
        if !self.satisfies_ordering() {
            return Err(Error::domain(
                "identifiability constraint violated: psi1(1-phi1) must be < psi2(1-phi2)",
            ));
        }
        Ok(())
    }

    /// ψ₁(1−φ₁) < ψ₂(1−φ₂).
    pub fn satisfies_ordering(&self) -> bool {
        self.psi[0] * (T::one() - self.phi[0]) < self.psi[1] * (T::one() - self.phi[1])
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![
            self.tau,
            self.psi[0],
            self.psi[1],
            self.phi[0],
            self.phi[1],
            self.sigma[0],
            self.sigma[1],
            self.xi[0],
            self.xi[1],
            self.xi[2],
        ]
    }

    pub fn from_slice(v: &[T]) -> Result<Self> {
        if v.len() != N_PARAMS {
            return Err(Error::Config(format!(
                "expected 10 parameters, got {}",
                v.len()
            )));
        }
        MixtureExpertsParams::new(
            v[0],
            [v[1], v[2]],
            [v[3], v[4]],
            [v[5], v[6]],
            [v[7], v[8], v[9]],
        )
    }

    fn stationary_mean(&self, j: usize) -> T {
        self.psi[j] / (T::one() - self.phi[j])
    }

    fn stationary_var(&self, j: usize) -> T {
        self.sigma[j] * self.sigma[j] / (T::one() - self.phi[j] * self.phi[j])
    }
}

/// Independent Gaussian prior on the unconstrained coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePrior<T> {
    pub means: Vec<T>,
    pub sds: Vec<T>,
}

impl<T: Scalar> Default for MixturePrior<T> {
    fn default() -> Self {
        MixturePrior {
            means: vec![T::zero(); N_PARAMS],
            sds: vec![c(5.0); N_PARAMS],
        }
    }
}

#[derive(Debug, Clone)]
pub struct MixtureModel<T> {
    prior: MixturePrior<T>,
    transform: ParameterTransform<T>,
}

impl<T: Scalar> Default for MixtureModel<T> {
    fn default() -> Self {
        Self::new(MixturePrior::default())
    }
}

impl<T: Scalar> MixtureModel<T> {
    pub fn new(prior: MixturePrior<T>) -> Self {
        assert_eq!(prior.means.len(), N_PARAMS);
        assert_eq!(prior.sds.len(), N_PARAMS);
        MixtureModel {
            prior,
            transform: ParameterTransform::new(vec![
                ComponentTransform::Log,      // tau
                ComponentTransform::Identity, // psi1
                ComponentTransform::Identity, // psi2
                ComponentTransform::Atanh,    // phi1
                ComponentTransform::Atanh,    // phi2
                ComponentTransform::Log,      // sigma1
                ComponentTransform::Log,      // sigma2
                ComponentTransform::Identity, // xi1
                ComponentTransform::Identity, // xi2
                ComponentTransform::Identity, // xi3
            ]),
        }
    }

    pub fn params_from_unconstrained(
        &self,
        x: &UnconstrainedParams<T>,
    ) -> Result<MixtureExpertsParams<T>> {
        let theta = self.transform.to_constrained(x);
        MixtureExpertsParams::from_slice(&theta)
    }

    pub fn params_to_unconstrained(
        &self,
        p: &MixtureExpertsParams<T>,
    ) -> Result<UnconstrainedParams<T>> {
        self.transform.to_unconstrained(&p.to_vec())
    }
}

/// Evaluated parameters plus the stationary moments used by the initial density.
#[derive(Debug, Clone)]
pub struct MixtureCtx<T> {
    pub params: MixtureExpertsParams<T>,
    init_mean: [T; 2],
    init_var: [T; 2],
}

#[inline]
fn ln_logistic<T: Scalar>(eta: T) -> T {
    // ln σ(η) = −softplus(−η), stable in both tails.
    -softplus(-eta)
}

#[inline]
fn softplus<T: Scalar>(y: T) -> T {
    y.max(T::zero()) + (-y.abs()).exp().ln_1p()
}

impl<T: Scalar> MixtureCtx<T> {
    /// Gate linear predictor η(s_{t-1}, s_{t-2}).
    #[inline]
    fn gate_eta(&self, prev: T, prev2: T) -> T {
        let xi = &self.params.xi;
        xi[0] + xi[1] * prev + xi[2] * (prev - prev2)
    }

    /// (ln p₁, ln p₂) of the gate.
    #[inline]
    fn gate_log_probs(&self, prev: T, prev2: T) -> (T, T) {
        let eta = self.gate_eta(prev, prev2);
        (ln_logistic(eta), ln_logistic(-eta))
    }

    /// Expert mean ψ_j + φ_j s_{t-1}.
    #[inline]
    fn expert_mean(&self, j: usize, prev: T) -> T {
        self.params.psi[j] + self.params.phi[j] * prev
    }

    /// log of the mixture transition density of s_t given (s_{t-1}, s_{t-2}).
    fn scalar_transition_logpdf(&self, prev: T, prev2: T, s: T) -> T {
        let (lp1, lp2) = self.gate_log_probs(prev, prev2);
        let l1 = lp1 + norm_logpdf(s, self.expert_mean(0, prev), self.params.sigma[0]);
        let l2 = lp2 + norm_logpdf(s, self.expert_mean(1, prev), self.params.sigma[1]);
        let m = l1.max(l2);
        if !m.is_finite() {
            return m;
        }
        m + ((l1 - m).exp() + (l2 - m).exp()).ln()
    }

    /// Gradient of `scalar_transition_logpdf` with respect to the
    /// unconstrained parameters, accumulated into `out`.
    fn scalar_transition_grad(&self, prev: T, prev2: T, s: T, out: &mut [T]) {
        let p = &self.params;
        let one = T::one();
        let (lp1, lp2) = self.gate_log_probs(prev, prev2);
        let ln1 = norm_logpdf(s, self.expert_mean(0, prev), p.sigma[0]);
        let ln2 = norm_logpdf(s, self.expert_mean(1, prev), p.sigma[1]);
        let l1 = lp1 + ln1;
        let l2 = lp2 + ln2;
        let m = l1.max(l2);
        let d = (l1 - m).exp() + (l2 - m).exp();
        // Responsibilities a_j = p_j N_j / Σ.
        let a1 = (l1 - m).exp() / d;
        let a2 = (l2 - m).exp() / d;
        let p1 = lp1.exp();
        let p2 = lp2.exp();

        // Expert blocks, chain-ruled to unconstrained coordinates.
        for j in 0..2 {
            let a = if j == 0 { a1 } else { a2 };
            let r = s - self.expert_mean(j, prev);
            let s2 = p.sigma[j] * p.sigma[j];
            out[IDX_PSI1 + j] += a * r / s2;
            out[IDX_PHI1 + j] += a * (one - p.phi[j] * p.phi[j]) * r * prev / s2;
            out[IDX_SIGMA1 + j] += a * (-one + r * r / s2);
        }
        // Gate block: ∂ ln D / ∂ξ = (p₂ a₁ − p₁ a₂) ∂η/∂ξ.
        let gate_coef = p2 * a1 - p1 * a2;
        out[IDX_XI1] += gate_coef;
        out[IDX_XI2] += gate_coef * prev;
        out[IDX_XI3] += gate_coef * (prev - prev2);
    }

    /// log of the equal-weight stationary mixture density of s₀.
    fn stationary_logpdf(&self, s0: T) -> T {
        let half = c::<T>(0.5);
        let l1 = half.ln() + norm_logpdf(s0, self.init_mean[0], self.init_var[0].sqrt());
        let l2 = half.ln() + norm_logpdf(s0, self.init_mean[1], self.init_var[1].sqrt());
        let m = l1.max(l2);
        m + ((l1 - m).exp() + (l2 - m).exp()).ln()
    }

    fn stationary_grad(&self, s0: T, out: &mut [T]) {
        let p = &self.params;
        let one = T::one();
        let two = c::<T>(2.0);
        let l1 = norm_logpdf(s0, self.init_mean[0], self.init_var[0].sqrt());
        let l2 = norm_logpdf(s0, self.init_mean[1], self.init_var[1].sqrt());
        let m = l1.max(l2);
        let d = (l1 - m).exp() + (l2 - m).exp();
        for j in 0..2 {
            let b = (if j == 0 { l1 } else { l2 } - m).exp() / d;
            let dv = s0 - self.init_mean[j];
            let v = self.init_var[j];
            let dldm = dv / v;
            let dldv = -one / (two * v) + dv * dv / (two * v * v);
            let omp = one - p.phi[j];
            let omp2 = one - p.phi[j] * p.phi[j];
            out[IDX_PSI1 + j] += b * dldm / omp;
            out[IDX_PHI1 + j] += b
                * omp2
                * (dldm * p.psi[j] / (omp * omp)
                    + dldv * two * p.phi[j] * p.sigma[j] * p.sigma[j] / (omp2 * omp2));
            out[IDX_SIGMA1 + j] += b * dldv * two * p.sigma[j] * p.sigma[j] / omp2;
        }
    }
}

impl<T: Scalar> StateSpaceModel<T> for MixtureModel<T> {
    type Ctx = MixtureCtx<T>;

    fn n_params(&self) -> usize {
        N_PARAMS
    }

    /// Augmented state (s_t, s_{t-1}).
    fn state_dim(&self) -> usize {
        2
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn transform(&self) -> &ParameterTransform<T> {
        &self.transform
    }

    fn prepare(&self, x: &UnconstrainedParams<T>) -> Result<Self::Ctx> {
        if x.dim() != N_PARAMS {
            return Err(Error::Config(format!(
                "expected 10 unconstrained parameters, got {}",
                x.dim()
            )));
        }
        let theta = self.transform.to_constrained(x);
        // The ordering constraint is handled by the prior, not here; the
        // densities below are well-defined either way.
        let params = MixtureExpertsParams {
            tau: theta[IDX_TAU],
            psi: [theta[IDX_PSI1], theta[IDX_PSI2]],
            phi: [theta[IDX_PHI1], theta[IDX_PHI2]],
            sigma: [theta[IDX_SIGMA1], theta[IDX_SIGMA2]],
            xi: [theta[IDX_XI1], theta[IDX_XI2], theta[IDX_XI3]],
        };
        Ok(MixtureCtx {
            init_mean: [params.stationary_mean(0), params.stationary_mean(1)],
            init_var: [params.stationary_var(0), params.stationary_var(1)],
            params,
        })
    }

    fn log_prior(&self, x: &UnconstrainedParams<T>) -> T {
        let theta = self.transform.to_constrained(x);
        let psi1_term = theta[IDX_PSI1] * (T::one() - theta[IDX_PHI1]);
        let psi2_term = theta[IDX_PSI2] * (T::one() - theta[IDX_PHI2]);
        if !(psi1_term < psi2_term) {
            return T::neg_infinity();
        }
        x.values()
            .iter()
            .zip(self.prior.means.iter().zip(&self.prior.sds))
            .map(|(&v, (&m, &sd))| norm_logpdf(v, m, sd))
            .sum()
    }

    fn grad_log_prior(&self, x: &UnconstrainedParams<T>) -> Vec<T> {
        x.values()
            .iter()
            .zip(self.prior.means.iter().zip(&self.prior.sds))
            .map(|(&v, (&m, &sd))| -(v - m) / (sd * sd))
            .collect()
    }

    fn init_logpdf(&self, ctx: &Self::Ctx, state: &[T]) -> T {
        // state = (s_1, s_0), with s_{-1} taken equal to s_0.
        let (s1, s0) = (state[0], state[1]);
        ctx.stationary_logpdf(s0) + ctx.scalar_transition_logpdf(s0, s0, s1)
    }

    fn transition_logpdf(&self, ctx: &Self::Ctx, prev: &[T], state: &[T]) -> T {
        debug_assert!(state[1] == prev[0], "augmented state must carry s_{{t-1}}");
        ctx.scalar_transition_logpdf(prev[0], prev[1], state[0])
    }

    fn observation_logpdf(&self, ctx: &Self::Ctx, state: &[T], obs: &[T]) -> T {
        norm_logpdf(obs[0], state[0], ctx.params.tau)
    }

    fn sample_init<R: Rng + ?Sized>(&self, ctx: &Self::Ctx, rng: &mut R, out: &mut [T]) {
        let half = c::<T>(0.5);
        let j0 = usize::from(T::sample_uniform(rng) >= half);
        let s0 = ctx.init_mean[j0] + ctx.init_var[j0].sqrt() * T::sample_std_normal(rng);
        let (lp1, _) = ctx.gate_log_probs(s0, s0);
        let j1 = usize::from(T::sample_uniform(rng).ln() >= lp1);
        let s1 =
            ctx.expert_mean(j1, s0) + ctx.params.sigma[j1] * T::sample_std_normal(rng);
        out[0] = s1;
        out[1] = s0;
    }

    fn sample_transition<R: Rng + ?Sized>(
        &self,
        ctx: &Self::Ctx,
        prev: &[T],
        rng: &mut R,
        out: &mut [T],
    ) {
        let (lp1, _) = ctx.gate_log_probs(prev[0], prev[1]);
        let j = usize::from(T::sample_uniform(rng).ln() >= lp1);
        out[0] = ctx.expert_mean(j, prev[0]) + ctx.params.sigma[j] * T::sample_std_normal(rng);
        out[1] = prev[0];
    }

    fn grad_init(&self, ctx: &Self::Ctx, state: &[T], out: &mut [T]) {
        out.fill(T::zero());
        let (s1, s0) = (state[0], state[1]);
        ctx.stationary_grad(s0, out);
        ctx.scalar_transition_grad(s0, s0, s1, out);
    }

    fn grad_transition(&self, ctx: &Self::Ctx, prev: &[T], state: &[T], out: &mut [T]) {
        out.fill(T::zero());
        ctx.scalar_transition_grad(prev[0], prev[1], state[0], out);
    }

    fn grad_observation(&self, ctx: &Self::Ctx, state: &[T], obs: &[T], out: &mut [T]) {
        out.fill(T::zero());
        let e = obs[0] - state[0];
        let t2 = ctx.params.tau * ctx.params.tau;
        out[IDX_TAU] = -T::one() + e * e / t2;
    }
}

/// Simulates states s_{1:T}, regimes J_{1:T} (0-based expert index) and
/// observations z_{1:T}. The gate needs two lags, so T ≥ 2.
pub fn simulate<T: Scalar, R: Rng + ?Sized>(
    params: &MixtureExpertsParams<T>,
    t_len: usize,
    rng: &mut R,
) -> Result<(Vec<T>, Vec<usize>, ObservationSeries<T>)> {
    params.validate()?;
    if t_len < 2 {
        return Err(Error::Config(
            "mixture simulation needs at least two time steps".into(),
        ));
    }
    let model = MixtureModel::default();
    let x = model.params_to_unconstrained(params)?;
    let ctx = model.prepare(&x)?;
    let half = c::<T>(0.5);

    let j0 = usize::from(T::sample_uniform(rng) >= half);
    let s0 = ctx.init_mean[j0] + ctx.init_var[j0].sqrt() * T::sample_std_normal(rng);
    let mut prev2 = s0; // s_{-1} := s_0
    let mut prev = s0;

    let mut states = Vec::with_capacity(t_len);
    let mut regimes = Vec::with_capacity(t_len);
    let mut obs = Vec::with_capacity(t_len);
    for _ in 0..t_len {
        let (lp1, _) = ctx.gate_log_probs(prev, prev2);
        let j = usize::from(T::sample_uniform(rng).ln() >= lp1);
        let s = ctx.expert_mean(j, prev) + params.sigma[j] * T::sample_std_normal(rng);
        let z = s + params.tau * T::sample_std_normal(rng);
        states.push(s);
        regimes.push(j);
        obs.push(z);
        prev2 = prev;
        prev = s;
    }
    Ok((states, regimes, ObservationSeries::from_scalars(obs)?))
}

/// Gate probability pr(J_t = 1 | s_{t-1}, s_{t-2}) for a parameter set.
pub fn gate_probability<T: Scalar>(params: &MixtureExpertsParams<T>, prev: T, prev2: T) -> T {
    let eta = params.xi[0] + params.xi[1] * prev + params.xi[2] * (prev - prev2);
    ln_logistic(eta).exp()
}

/// Fully adapted proposal for the mixture model: per-expert Gaussian
/// conjugacy mixed over the gate, so q(s_t | u_{t-1}, z_t) and the
/// predictive p(z_t | u_{t-1}) are two-component Gaussian mixtures and the
/// post-update weights are uniform.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullyAdaptedMixture;

impl FullyAdaptedMixture {
    /// Per-expert conditional posterior (mean, var) and predictive logpdf.
    #[inline]
    fn expert_quantities<T: Scalar>(
        ctx: &MixtureCtx<T>,
        j: usize,
        prev: T,
        z: T,
    ) -> (T, T, T) {
        let p = &ctx.params;
        let s2 = p.sigma[j] * p.sigma[j];
        let t2 = p.tau * p.tau;
        let m = ctx.expert_mean(j, prev);
        let pred = norm_logpdf(z, m, (s2 + t2).sqrt());
        let var = s2 * t2 / (s2 + t2);
        let mean = var * (m / s2 + z / t2);
        (mean, var, pred)
    }

    /// log p(z_t | s_{t-1}, s_{t-2}) mixed over the gate.
    pub fn predictive_logpdf<T: Scalar>(ctx: &MixtureCtx<T>, prev: T, prev2: T, z: T) -> T {
        let (lp1, lp2) = ctx.gate_log_probs(prev, prev2);
        let (_, _, pr1) = Self::expert_quantities(ctx, 0, prev, z);
        let (_, _, pr2) = Self::expert_quantities(ctx, 1, prev, z);
        let l1 = lp1 + pr1;
        let l2 = lp2 + pr2;
        let m = l1.max(l2);
        m + ((l1 - m).exp() + (l2 - m).exp()).ln()
    }

    /// Posterior regime log-probabilities and component moments.
    fn components<T: Scalar>(ctx: &MixtureCtx<T>, prev: T, prev2: T, z: T) -> [(T, T, T); 2] {
        let (lp1, lp2) = ctx.gate_log_probs(prev, prev2);
        let (m1, v1, pr1) = Self::expert_quantities(ctx, 0, prev, z);
        let (m2, v2, pr2) = Self::expert_quantities(ctx, 1, prev, z);
        let l1 = lp1 + pr1;
        let l2 = lp2 + pr2;
        let m = l1.max(l2);
        let norm = m + ((l1 - m).exp() + (l2 - m).exp()).ln();
        [(l1 - norm, m1, v1), (l2 - norm, m2, v2)]
    }
}

impl<T: Scalar> ProposalAdapter<T, MixtureModel<T>> for FullyAdaptedMixture {
    fn aux_log_weights(
        &self,
        _model: &MixtureModel<T>,
        ctx: &MixtureCtx<T>,
        prev_states: &[T],
        prev_log_weights: &[T],
        obs: &[T],
        out: &mut [T],
    ) {
        for i in 0..prev_log_weights.len() {
            let prev = &prev_states[2 * i..2 * i + 2];
            out[i] = prev_log_weights[i]
                + Self::predictive_logpdf(ctx, prev[0], prev[1], obs[0]);
        }
    }

    fn propose<R: Rng + ?Sized>(
        &self,
        _model: &MixtureModel<T>,
        ctx: &MixtureCtx<T>,
        prev: &[T],
        obs: &[T],
        rng: &mut R,
        out: &mut [T],
    ) {
        let comps = Self::components(ctx, prev[0], prev[1], obs[0]);
        let j = usize::from(T::sample_uniform(rng).ln() >= comps[0].0);
        let (_, mean, var) = comps[j];
        out[0] = mean + var.sqrt() * T::sample_std_normal(rng);
        out[1] = prev[0];
    }

    fn proposal_logpdf(
        &self,
        _model: &MixtureModel<T>,
        ctx: &MixtureCtx<T>,
        prev: &[T],
        state: &[T],
        obs: &[T],
    ) -> T {
        let comps = Self::components(ctx, prev[0], prev[1], obs[0]);
        let l1 = comps[0].0 + norm_logpdf(state[0], comps[0].1, comps[0].2.sqrt());
        let l2 = comps[1].0 + norm_logpdf(state[0], comps[1].1, comps[1].2.sqrt());
        let m = l1.max(l2);
        m + ((l1 - m).exp() + (l2 - m).exp()).ln()
    }
}
