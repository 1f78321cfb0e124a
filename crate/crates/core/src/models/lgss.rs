//! Linear Gaussian state-space model
//!
//! ```text
//! z_t = α + β s_t + τ_ε ν_t,   s_t = μ + φ s_{t-1} + σ_ε η_t,
//! s_0 ~ N(μ/(1-φ), σ_ε²/(1-φ²)),
//! ```
//!
//! with parameter vector (α, β, τ_ε, μ, φ, σ_ε). The likelihood and its
//! gradient are available exactly through the Kalman filter, which makes the
//! model the verification oracle for every particle-based estimator in the
//! crate. Unconstrained coordinates are (α, β, log τ_ε, μ, atanh φ, log σ_ε).

use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::ProposalAdapter;
use crate::scalar::{c, ln_two_pi, Scalar};
use crate::ssm::{
    ComponentTransform, ObservationSeries, ParameterTransform, StateSpaceModel,
    UnconstrainedParams,
};
use crate::stats::{log_sum_exp, norm_logpdf};

pub const N_PARAMS: usize = 6;

// Component indices in the parameter vector.
pub const IDX_ALPHA: usize = 0;
pub const IDX_BETA: usize = 1;
pub const IDX_TAU: usize = 2;
pub const IDX_MU: usize = 3;
pub const IDX_PHI: usize = 4;
pub const IDX_SIGMA: usize = 5;

/// Constrained parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgssParams<T> {
    pub alpha: T,
    pub beta: T,
    /// Observation noise sd, > 0.
    pub tau: T,
    pub mu: T,
    /// AR coefficient, |φ| < 1.
    pub phi: T,
    /// State noise sd, > 0.
    pub sigma: T,
}

impl<T: Scalar> LgssParams<T> {
    pub fn new(alpha: T, beta: T, tau: T, mu: T, phi: T, sigma: T) -> Result<Self> {
        let p = LgssParams {
            alpha,
            beta,
            tau,
            mu,
            phi,
            sigma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi.abs() < T::one()) {
            return Err(Error::domain(format!("|phi| must be < 1, got {}", self.phi)));
        }
        if !(self.tau > T::zero()) || !(self.sigma > T::zero()) {
            return Err(Error::domain("noise standard deviations must be positive"));
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.alpha, self.beta, self.tau, self.mu, self.phi, self.sigma]
    }

    pub fn from_slice(v: &[T]) -> Result<Self> {
        if v.len() != N_PARAMS {
            return Err(Error::Config(format!("expected 6 parameters, got {}", v.len())));
        }
        LgssParams::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    /// Mean of the stationary state distribution, μ/(1−φ).
    pub fn stationary_mean(&self) -> T {
        self.mu / (T::one() - self.phi)
    }

    /// Variance of the stationary state distribution, σ²/(1−φ²).
    pub fn stationary_var(&self) -> T {
        self.sigma * self.sigma / (T::one() - self.phi * self.phi)
    }
}

/// The §4.2-style prior: (α, β) Gaussian with τ²-scaled variances, inverse
/// gamma on the noise variances, Gaussian on μ and a stretched beta on φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgssPrior<T> {
    pub alpha_mean: T,
    /// var(α) = alpha_var_factor · τ².
    pub alpha_var_factor: T,
    pub beta_mean: T,
    pub beta_var_factor: T,
    /// τ² ~ InverseGamma(shape, rate).
    pub tau2_shape: T,
    pub tau2_rate: T,
    pub mu_mean: T,
    pub mu_var: T,
    /// (φ+1)/2 ~ Beta(a, b).
    pub phi_beta_a: T,
    pub phi_beta_b: T,
    /// σ² ~ InverseGamma(shape, rate).
    pub sigma2_shape: T,
    pub sigma2_rate: T,
}

impl<T: Scalar> Default for LgssPrior<T> {
    fn default() -> Self {
        LgssPrior {
            alpha_mean: c(0.3),
            alpha_var_factor: c(0.25),
            beta_mean: c(1.2),
            beta_var_factor: c(0.5),
            tau2_shape: c(1.0),
            tau2_rate: c(0.35),
            mu_mean: c(0.15),
            mu_var: c(0.5),
            phi_beta_a: c(20.0),
            phi_beta_b: c(5.0),
            sigma2_shape: c(2.0),
            sigma2_rate: c(0.025),
        }
    }
}

fn inverse_gamma_logpdf<T: Scalar>(y: T, shape: T, rate: T) -> T {
    shape * rate.ln() - shape.ln_gamma() - (shape + T::one()) * y.ln() - rate / y
}

/// Density of x = log s where s² ~ InverseGamma(shape, rate), written in x
/// so the tails underflow cleanly to −∞.
fn ig_transformed_logpdf<T: Scalar>(x: T, shape: T, rate: T) -> T {
    let two = c::<T>(2.0);
    shape * rate.ln() - shape.ln_gamma() + two.ln() - two * shape * x
        - rate * (-two * x).exp()
}

fn beta_logpdf<T: Scalar>(u: T, a: T, b: T) -> T {
    let ln_beta = a.ln_gamma() + b.ln_gamma() - (a + b).ln_gamma();
    (a - T::one()) * u.ln() + (b - T::one()) * (T::one() - u).ln() - ln_beta
}

impl<T: Scalar> LgssPrior<T> {
    /// log prior density of the unconstrained coordinate x = log τ
    /// (τ² inverse-gamma pushed through τ² = e^{2x}); evaluated directly in
    /// x so extreme coordinates degrade to −∞ instead of NaN.
    pub(crate) fn log_tau_component(&self, x_tau: T) -> T {
        ig_transformed_logpdf(x_tau, self.tau2_shape, self.tau2_rate)
    }

    /// log prior density of x = atanh φ ((φ+1)/2 beta pushed through tanh).
    pub(crate) fn log_phi_component(&self, x_phi: T) -> T {
        let phi = x_phi.tanh();
        let u = (phi + T::one()) / c(2.0);
        beta_logpdf(u, self.phi_beta_a, self.phi_beta_b) - c::<T>(2.0).ln()
            + (T::one() - phi * phi).ln()
    }

    /// log prior density of x = log σ.
    pub(crate) fn log_sigma_component(&self, x_sigma: T) -> T {
        ig_transformed_logpdf(x_sigma, self.sigma2_shape, self.sigma2_rate)
    }

    pub(crate) fn log_mu_component(&self, mu: T) -> T {
        norm_logpdf(mu, self.mu_mean, self.mu_var.sqrt())
    }
}

/// The model: fixed prior plus the standard transform.
#[derive(Debug, Clone)]
pub struct LgssModel<T> {
    prior: LgssPrior<T>,
    transform: ParameterTransform<T>,
}

impl<T: Scalar> Default for LgssModel<T> {
    fn default() -> Self {
        Self::new(LgssPrior::default())
    }
}

impl<T: Scalar> LgssModel<T> {
    pub fn new(prior: LgssPrior<T>) -> Self {
        LgssModel {
            prior,
            transform: ParameterTransform::new(vec![
                ComponentTransform::Identity,
                ComponentTransform::Identity,
                ComponentTransform::Log,
                ComponentTransform::Identity,
                ComponentTransform::Atanh,
                ComponentTransform::Log,
            ]),
        }
    }

    pub fn prior(&self) -> &LgssPrior<T> {
        &self.prior
    }

    pub fn params_from_unconstrained(&self, x: &UnconstrainedParams<T>) -> Result<LgssParams<T>> {
        let theta = self.transform.to_constrained(x);
        LgssParams::from_slice(&theta)
    }

    pub fn params_to_unconstrained(&self, p: &LgssParams<T>) -> Result<UnconstrainedParams<T>> {
        self.transform.to_unconstrained(&p.to_vec())
    }
}

/// Constrained parameters with the per-step constants the hot loops reuse.
#[derive(Debug, Clone)]
pub struct LgssCtx<T> {
    pub params: LgssParams<T>,
    init_mean: T,
    init_var: T,
    init_sd: T,
}

impl<T: Scalar> StateSpaceModel<T> for LgssModel<T> {
    type Ctx = LgssCtx<T>;

    fn n_params(&self) -> usize {
        N_PARAMS
    }

    fn state_dim(&self) -> usize {
        1
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
                "expected 6 unconstrained parameters, got {}",
                x.dim()
            )));
        }
        let params = self.params_from_unconstrained(x)?;
        let init_mean = params.stationary_mean();
        let init_var = params.stationary_var();
        Ok(LgssCtx {
            params,
            init_mean,
            init_var,
            init_sd: init_var.sqrt(),
        })
    }

    fn log_prior(&self, x: &UnconstrainedParams<T>) -> T {
        let v = x.values();
        let pr = &self.prior;
        let tau = v[IDX_TAU].exp();
        let lp_alpha = norm_logpdf(v[IDX_ALPHA], pr.alpha_mean, (pr.alpha_var_factor).sqrt() * tau);
        let lp_beta = norm_logpdf(v[IDX_BETA], pr.beta_mean, (pr.beta_var_factor).sqrt() * tau);
        lp_alpha
            + lp_beta
            + pr.log_tau_component(v[IDX_TAU])
            + pr.log_mu_component(v[IDX_MU])
            + pr.log_phi_component(v[IDX_PHI])
            + pr.log_sigma_component(v[IDX_SIGMA])
    }

    fn grad_log_prior(&self, x: &UnconstrainedParams<T>) -> Vec<T> {
        let v = x.values();
        let pr = &self.prior;
        let one = T::one();
        let two = c::<T>(2.0);
        let tau = v[IDX_TAU].exp();
        let tau2 = tau * tau;
        let sigma = v[IDX_SIGMA].exp();
        let phi = v[IDX_PHI].tanh();

        let da = -(v[IDX_ALPHA] - pr.alpha_mean) / (pr.alpha_var_factor * tau2);
        let db = -(v[IDX_BETA] - pr.beta_mean) / (pr.beta_var_factor * tau2);
        // d/d(log τ) of the α and β blocks: each is −1 + (θ−m)²/(factor τ²).
        let ea = v[IDX_ALPHA] - pr.alpha_mean;
        let eb = v[IDX_BETA] - pr.beta_mean;
        let dtau_ab = -one + ea * ea / (pr.alpha_var_factor * tau2) - one
            + eb * eb / (pr.beta_var_factor * tau2);
        // d/d(log τ) of the inverse-gamma block pushed to x: −2(a+1) + 2b/τ² + 2.
        let dtau_ig = -two * (pr.tau2_shape + one) + two * pr.tau2_rate / tau2 + two;
        let dmu = -(v[IDX_MU] - pr.mu_mean) / pr.mu_var;
        let u = (phi + one) / two;
        let dphi = (one - phi * phi)
            * ((pr.phi_beta_a - one) / u - (pr.phi_beta_b - one) / (one - u))
            / two
            - two * phi;
        let dsigma =
            -two * (pr.sigma2_shape + one) + two * pr.sigma2_rate / (sigma * sigma) + two;

        vec![da, db, dtau_ab + dtau_ig, dmu, dphi, dsigma]
    }

    fn init_logpdf(&self, ctx: &Self::Ctx, state: &[T]) -> T {
        norm_logpdf(state[0], ctx.init_mean, ctx.init_sd)
    }

    fn transition_logpdf(&self, ctx: &Self::Ctx, prev: &[T], state: &[T]) -> T {
        let p = &ctx.params;
        norm_logpdf(state[0], p.mu + p.phi * prev[0], p.sigma)
    }

    fn observation_logpdf(&self, ctx: &Self::Ctx, state: &[T], obs: &[T]) -> T {
        let p = &ctx.params;
        norm_logpdf(obs[0], p.alpha + p.beta * state[0], p.tau)
    }

    fn sample_init<R: Rng + ?Sized>(&self, ctx: &Self::Ctx, rng: &mut R, out: &mut [T]) {
        out[0] = ctx.init_mean + ctx.init_sd * T::sample_std_normal(rng);
    }

    fn sample_transition<R: Rng + ?Sized>(
        &self,
        ctx: &Self::Ctx,
        prev: &[T],
        rng: &mut R,
        out: &mut [T],
    ) {
        let p = &ctx.params;
        out[0] = p.mu + p.phi * prev[0] + p.sigma * T::sample_std_normal(rng);
    }

    fn grad_init(&self, ctx: &Self::Ctx, state: &[T], out: &mut [T]) {
        let p = &ctx.params;
        let one = T::one();
        let two = c::<T>(2.0);
        out.fill(T::zero());
        let d = state[0] - ctx.init_mean;
        let dm = d / ctx.init_var;
        let dv = -one / (two * ctx.init_var) + d * d / (two * ctx.init_var * ctx.init_var);
        let omp = one - p.phi;
        let omp2 = one - p.phi * p.phi;
        out[IDX_MU] = dm / omp;
        out[IDX_PHI] = omp2
            * (dm * p.mu / (omp * omp) + dv * two * p.phi * p.sigma * p.sigma / (omp2 * omp2));
        out[IDX_SIGMA] = dv * two * p.sigma * p.sigma / omp2;
    }

    fn grad_transition(&self, ctx: &Self::Ctx, prev: &[T], state: &[T], out: &mut [T]) {
        let p = &ctx.params;
        out.fill(T::zero());
        let s2 = p.sigma * p.sigma;
        let r = state[0] - p.mu - p.phi * prev[0];
        out[IDX_MU] = r / s2;
        out[IDX_PHI] = (T::one() - p.phi * p.phi) * r * prev[0] / s2;
        out[IDX_SIGMA] = -T::one() + r * r / s2;
    }

    fn grad_observation(&self, ctx: &Self::Ctx, state: &[T], obs: &[T], out: &mut [T]) {
        let p = &ctx.params;
        out.fill(T::zero());
        let t2 = p.tau * p.tau;
        let e = obs[0] - p.alpha - p.beta * state[0];
        out[IDX_ALPHA] = e / t2;
        out[IDX_BETA] = e * state[0] / t2;
        out[IDX_TAU] = -T::one() + e * e / t2;
    }
}

/// Simulates states s_{1:T} and observations z_{1:T} from the model, with
/// s_0 drawn from the stationary distribution.
pub fn simulate<T: Scalar, R: Rng + ?Sized>(
    params: &LgssParams<T>,
    t_len: usize,
    rng: &mut R,
) -> Result<(Vec<T>, ObservationSeries<T>)> {
    params.validate()?;
    if t_len == 0 {
        return Err(Error::Config("need at least one observation".into()));
    }
    let mut states = Vec::with_capacity(t_len);
    let mut obs = Vec::with_capacity(t_len);
    let mut s = params.stationary_mean() + params.stationary_var().sqrt() * T::sample_std_normal(rng);
    for _ in 0..t_len {
        s = params.mu + params.phi * s + params.sigma * T::sample_std_normal(rng);
        states.push(s);
        obs.push(params.alpha + params.beta * s + params.tau * T::sample_std_normal(rng));
    }
    Ok((states, ObservationSeries::from_scalars(obs)?))
}

/// Exact marginal log-likelihood log p(z_{1:T} | θ) by the Kalman recursion.
pub fn kalman_loglik<T: Scalar>(params: &LgssParams<T>, data: &ObservationSeries<T>) -> Result<T> {
    params.validate()?;
    let one = T::one();
    let half = c::<T>(0.5);
    let mut m = params.stationary_mean();
    let mut p = params.stationary_var();
    let mut ll = T::zero();
    for t in 0..data.len() {
        let z = data.row(t)[0];
        let m_pred = params.mu + params.phi * m;
        let p_pred = params.phi * params.phi * p + params.sigma * params.sigma;
        let e = z - params.alpha - params.beta * m_pred;
        let s = params.beta * params.beta * p_pred + params.tau * params.tau;
        ll += -half * (ln_two_pi::<T>() + s.ln()) - e * e / (c::<T>(2.0) * s);
        if !ll.is_finite() {
            return Err(Error::non_finite(format!("Kalman log-likelihood at step {}", t + 1)));
        }
        let k = p_pred * params.beta / s;
        m = m_pred + k * e;
        p = (one - k * params.beta) * p_pred;
    }
    Ok(ll)
}

/// Exact gradient of the log-likelihood with respect to the *unconstrained*
/// parameters (α, β, log τ, μ, atanh φ, log σ), by forward sensitivity of
/// the Kalman recursion.
pub fn kalman_score<T: Scalar>(
    params: &LgssParams<T>,
    data: &ObservationSeries<T>,
) -> Result<Vec<T>> {
    params.validate()?;
    let one = T::one();
    let two = c::<T>(2.0);
    let half = c::<T>(0.5);
    let (alpha, beta, tau, mu, phi, sigma) = (
        params.alpha,
        params.beta,
        params.tau,
        params.mu,
        params.phi,
        params.sigma,
    );
    let omp = one - phi;
    let omp2 = one - phi * phi;

    let mut m = mu / omp;
    let mut p = sigma * sigma / omp2;
    let mut dm = [T::zero(); N_PARAMS];
    let mut dp = [T::zero(); N_PARAMS];
    dm[IDX_MU] = one / omp;
    dm[IDX_PHI] = mu / (omp * omp);
    dp[IDX_PHI] = two * phi * sigma * sigma / (omp2 * omp2);
    dp[IDX_SIGMA] = two * sigma / omp2;
    let mut dll = [T::zero(); N_PARAMS];

    for t in 0..data.len() {
        let z = data.row(t)[0];
        let m_pred = mu + phi * m;
        let p_pred = phi * phi * p + sigma * sigma;
        let e = z - alpha - beta * m_pred;
        let s = beta * beta * p_pred + tau * tau;
        if !(s > T::zero()) || !e.is_finite() {
            return Err(Error::non_finite(format!("Kalman sensitivity at step {}", t + 1)));
        }
        let k = p_pred * beta / s;

        let mut dm_pred = [T::zero(); N_PARAMS];
        let mut dp_pred = [T::zero(); N_PARAMS];
        for j in 0..N_PARAMS {
            dm_pred[j] = phi * dm[j];
            dp_pred[j] = phi * phi * dp[j];
        }
        dm_pred[IDX_MU] += one;
        dm_pred[IDX_PHI] += m;
        dp_pred[IDX_PHI] += two * phi * p;
        dp_pred[IDX_SIGMA] += two * sigma;

        let mut de = [T::zero(); N_PARAMS];
        let mut ds = [T::zero(); N_PARAMS];
        for j in 0..N_PARAMS {
            de[j] = -beta * dm_pred[j];
            ds[j] = beta * beta * dp_pred[j];
        }
        de[IDX_ALPHA] -= one;
        de[IDX_BETA] -= m_pred;
        ds[IDX_BETA] += two * beta * p_pred;
        ds[IDX_TAU] += two * tau;

        for j in 0..N_PARAMS {
            dll[j] +=
                -half * ds[j] / s - e * de[j] / s + half * e * e * ds[j] / (s * s);
        }

        let mut dk = [T::zero(); N_PARAMS];
        for j in 0..N_PARAMS {
            dk[j] = (dp_pred[j] * beta) / s - p_pred * beta * ds[j] / (s * s);
        }
        dk[IDX_BETA] += p_pred / s;

        m = m_pred + k * e;
        p = (one - k * beta) * p_pred;
        for j in 0..N_PARAMS {
            dm[j] = dm_pred[j] + dk[j] * e + k * de[j];
            let mut dfac = -dk[j] * beta;
            if j == IDX_BETA {
                dfac -= k;
            }
            dp[j] = dfac * p_pred + (one - k * beta) * dp_pred[j];
        }
    }

    // Chain rule to the unconstrained coordinates.
    let chain = [one, one, tau, one, omp2, sigma];
    Ok((0..N_PARAMS).map(|j| dll[j] * chain[j]).collect())
}

/// Fully adapted proposal for the linear Gaussian model: q is the exact
/// conditional p(s_t | s_{t-1}, z_t) and ξ ∝ w · p(z_t | s_{t-1}), which
/// makes the post-update weights uniform.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullyAdaptedLgss;

impl FullyAdaptedLgss {
    /// p(z_t | s_{t-1}) = N(z; α + β(μ + φ s), β²σ² + τ²).
    #[inline]
    pub fn predictive_logpdf<T: Scalar>(ctx: &LgssCtx<T>, prev: T, z: T) -> T {
        let p = &ctx.params;
        let mean = p.alpha + p.beta * (p.mu + p.phi * prev);
        let var = p.beta * p.beta * p.sigma * p.sigma + p.tau * p.tau;
        norm_logpdf(z, mean, var.sqrt())
    }

    /// Conditional posterior moments of s_t given (s_{t-1}, z_t).
    #[inline]
    fn conditional<T: Scalar>(ctx: &LgssCtx<T>, prev: T, z: T) -> (T, T) {
        let p = &ctx.params;
        let s2 = p.sigma * p.sigma;
        let t2 = p.tau * p.tau;
        let prior_mean = p.mu + p.phi * prev;
        let var = s2 * t2 / (t2 + p.beta * p.beta * s2);
        let mean = var * (prior_mean / s2 + p.beta * (z - p.alpha) / t2);
        (mean, var)
    }
}

impl<T: Scalar> ProposalAdapter<T, LgssModel<T>> for FullyAdaptedLgss {
    fn aux_log_weights(
        &self,
        _model: &LgssModel<T>,
        ctx: &LgssCtx<T>,
        prev_states: &[T],
        prev_log_weights: &[T],
        obs: &[T],
        out: &mut [T],
    ) {
        for i in 0..prev_log_weights.len() {
            out[i] = prev_log_weights[i] + Self::predictive_logpdf(ctx, prev_states[i], obs[0]);
        }
    }

    fn propose<R: Rng + ?Sized>(
        &self,
        _model: &LgssModel<T>,
        ctx: &LgssCtx<T>,
        prev: &[T],
        obs: &[T],
        rng: &mut R,
        out: &mut [T],
    ) {
        let (mean, var) = Self::conditional(ctx, prev[0], obs[0]);
        out[0] = mean + var.sqrt() * T::sample_std_normal(rng);
    }

    fn proposal_logpdf(
        &self,
        _model: &LgssModel<T>,
        ctx: &LgssCtx<T>,
        prev: &[T],
        state: &[T],
        obs: &[T],
    ) -> T {
        let (mean, var) = Self::conditional(ctx, prev[0], obs[0]);
        norm_logpdf(state[0], mean, var.sqrt())
    }
}

/// Exact log of the T-dimensional observation density by dense evaluation;
/// test oracle for the Kalman recursion at small T.
pub fn dense_gaussian_loglik<T: Scalar>(
    params: &LgssParams<T>,
    data: &ObservationSeries<T>,
) -> Result<T> {
    use crate::linalg::SymMatrix;
    let t_len = data.len();
    let ms = params.stationary_mean();
    let vs = params.stationary_var();
    let mut cov = vec![T::zero(); t_len * t_len];
    for i in 0..t_len {
        for j in 0..t_len {
            let lag = if i > j { i - j } else { j - i };
            let mut v = params.beta * params.beta * vs * params.phi.powi(lag as i32);
            if i == j {
                v += params.tau * params.tau;
            }
            cov[i * t_len + j] = v;
        }
    }
    let cov = SymMatrix::from_rows(t_len, cov)?;
    let ch = cov.cholesky()?;
    let resid: Vec<T> = (0..t_len)
        .map(|t| data.row(t)[0] - params.alpha - params.beta * ms)
        .collect();
    let mut solved = vec![T::zero(); t_len];
    ch.forward_solve(&resid, &mut solved);
    let quad: T = solved.iter().map(|&v| v * v).sum();
    Ok(-c::<T>(0.5) * (c::<T>(t_len as f64) * ln_two_pi::<T>() + quad) - ch.half_log_det())
}

/// log p(z_{1:t} | x) marginalized by hand for φ = 0 models; test oracle.
pub fn iid_state_loglik<T: Scalar>(params: &LgssParams<T>, data: &ObservationSeries<T>) -> T {
    let sd = (params.beta * params.beta * params.sigma * params.sigma + params.tau * params.tau)
        .sqrt();
    data.iter_rows()
        .map(|z| norm_logpdf(z[0], params.alpha + params.beta * params.mu, sd))
        .sum()
}

/// Marginal predictive of the whole cloud, Σ_i w_i p(z | s_i); exposed for
/// the quadrature cross-checks in tests.
pub fn cloud_predictive_logpdf<T: Scalar>(
    ctx: &LgssCtx<T>,
    states: &[T],
    log_weights: &[T],
    z: T,
) -> T {
    let terms: Vec<T> = states
        .iter()
        .zip(log_weights)
        .map(|(&s, &lw)| lw + FullyAdaptedLgss::predictive_logpdf(ctx, s, z))
        .collect();
    log_sum_exp(&terms)
}
