//! Auxiliary particle filter with pluggable proposal adapters.
//!
//! The step structure follows the standard auxiliary formulation: at the
//! first observation, particles are drawn from the initial density and
//! weighted by the observation density; at every later step, ancestor
//! indices are drawn from user-supplied auxiliary probabilities ξ, particles
//! are propagated through the adapter proposal q, and weights are
//!
//! ```text
//! w̃_t = w_{t-1}^{(k)} g(z_t | s_t) f(s_t | s_{t-1}^{(k)}) / (ξ^{(k)} q(s_t | s_{t-1}^{(k)}, z_t))
//! ```
//!
//! The running product of the per-step normalizers C_t/N is an unbiased
//! estimate of the likelihood. Weights are kept in log space; resampling
//! happens every step. An optional fused score recursion (see [`crate::score`])
//! produces the O(N) gradient estimate in the same pass.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};
use crate::score::ScoreRecursion;
use crate::ssm::{ObservationSeries, StateSpaceModel, UnconstrainedParams};
use crate::stats::log_sum_exp;

/// How ancestor indices are drawn from the auxiliary probabilities.
///
/// Multinomial is the reference scheme; the likelihood-unbiasedness tests in
/// this crate cover it alone. Stratified and systematic are provided for
/// variance comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResamplingScheme {
    #[default]
    Multinomial,
    Stratified,
    Systematic,
}

/// Multinomial draws: each index i appears with expected count n_draws·p_i.
pub fn resample_multinomial<T: Scalar, R: Rng + ?Sized>(
    probs: &[T],
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let cum = cumulative(probs)?;
    let mut idx = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        let u = T::sample_uniform(rng) * cum[cum.len() - 1];
        idx.push(locate(&cum, u));
    }
    Ok(idx)
}

/// Stratified draws: one uniform per stratum [i/N, (i+1)/N).
pub fn resample_stratified<T: Scalar, R: Rng + ?Sized>(
    probs: &[T],
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let cum = cumulative(probs)?;
    let total = cum[cum.len() - 1];
    let n = c::<T>(n_draws as f64);
    let mut idx = Vec::with_capacity(n_draws);
    for i in 0..n_draws {
        let u = (c::<T>(i as f64) + T::sample_uniform(rng)) / n * total;
        idx.push(locate(&cum, u));
    }
    Ok(idx)
}

/// Systematic draws: a single uniform offset for all strata.
pub fn resample_systematic<T: Scalar, R: Rng + ?Sized>(
    probs: &[T],
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let cum = cumulative(probs)?;
    let total = cum[cum.len() - 1];
    let n = c::<T>(n_draws as f64);
    let u0 = T::sample_uniform(rng);
    let mut idx = Vec::with_capacity(n_draws);
    for i in 0..n_draws {
        let u = (c::<T>(i as f64) + u0) / n * total;
        idx.push(locate(&cum, u));
    }
    Ok(idx)
}

fn cumulative<T: Scalar>(probs: &[T]) -> Result<Vec<T>> {
    if probs.is_empty() {
        return Err(Error::domain("empty probability vector"));
    }
    let mut cum = Vec::with_capacity(probs.len());
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        if p < T::zero() || !p.is_finite() {
            return Err(Error::domain(format!("invalid probability {p} at index {i}")));
        }
        acc += p;
        cum.push(acc);
    }
    if acc <= T::zero() {
        return Err(Error::domain("probabilities sum to zero"));
    }
    Ok(cum)
}

#[inline]
fn locate<T: Scalar>(cum: &[T], u: T) -> usize {
    match cum.binary_search_by(|v| v.partial_cmp(&u).expect("finite cumulative weights")) {
        Ok(i) => i,
        Err(i) => i.min(cum.len() - 1),
    }
}

/// Proposal machinery for step t ≥ 2 of the filter.
///
/// `aux_log_weights` fills *unnormalized* log ξ; the filter normalizes.
/// `q` must be strictly positive wherever the model transition times the
/// observation density is positive.
pub trait ProposalAdapter<T: Scalar, M: StateSpaceModel<T>>: Send + Sync {
    fn aux_log_weights(
        &self,
        model: &M,
        ctx: &M::Ctx,
        prev_states: &[T],
        prev_log_weights: &[T],
        obs: &[T],
        out: &mut [T],
    );

    fn propose<R: Rng + ?Sized>(
        &self,
        model: &M,
        ctx: &M::Ctx,
        prev: &[T],
        obs: &[T],
        rng: &mut R,
        out: &mut [T],
    );

    fn proposal_logpdf(&self, model: &M, ctx: &M::Ctx, prev: &[T], state: &[T], obs: &[T]) -> T;
}

/// Bootstrap adapter: ξ = previous weights, q = model transition. The
/// generic weight formula then collapses to w̃ = g(z_t | s_t).
#[derive(Debug, Clone, Copy, Default)]
pub struct BootstrapAdapter;

impl<T: Scalar, M: StateSpaceModel<T>> ProposalAdapter<T, M> for BootstrapAdapter {
    fn aux_log_weights(
        &self,
        _model: &M,
        _ctx: &M::Ctx,
        _prev_states: &[T],
        prev_log_weights: &[T],
        _obs: &[T],
        out: &mut [T],
    ) {
        out.copy_from_slice(prev_log_weights);
    }

    fn propose<R: Rng + ?Sized>(
        &self,
        model: &M,
        ctx: &M::Ctx,
        prev: &[T],
        _obs: &[T],
        rng: &mut R,
        out: &mut [T],
    ) {
        model.sample_transition(ctx, prev, rng, out);
    }

    fn proposal_logpdf(&self, model: &M, ctx: &M::Ctx, prev: &[T], state: &[T], _obs: &[T]) -> T {
        model.transition_logpdf(ctx, prev, state)
    }
}

/// Particle system after one filter step.
#[derive(Debug, Clone)]
pub struct ParticleCloud<T> {
    pub n_particles: usize,
    pub state_dim: usize,
    /// Flattened N × state_dim states.
    pub states: Vec<T>,
    /// Normalized log weights.
    pub log_weights: Vec<T>,
    /// Normalized weights (sum to one).
    pub weights: Vec<T>,
    /// Ancestor index of each particle from the last propagation.
    pub ancestors: Vec<usize>,
    /// Per-particle score-recursion means (N × n_params) when enabled.
    pub score_means: Option<Vec<T>>,
}

impl<T: Scalar> ParticleCloud<T> {
    #[inline]
    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.state_dim..(i + 1) * self.state_dim]
    }
}

/// Per-step snapshot kept when `keep_history` is set.
#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub states: Vec<T>,
    pub ancestors: Vec<usize>,
    pub log_weights: Vec<T>,
    pub weights: Vec<T>,
    /// log(C_t / N).
    pub log_normalizer: T,
}

/// Filter configuration.
#[derive(Debug, Clone)]
pub struct FilterSettings<T> {
    pub n_particles: usize,
    /// Run the fused score recursion.
    pub with_score: bool,
    /// Shrinkage ζ ∈ (0, 1] of the score recursion.
    pub zeta: T,
    pub resampling: ResamplingScheme,
    /// Keep per-step clouds (debugging and genealogy tests).
    pub keep_history: bool,
}

impl<T: Scalar> FilterSettings<T> {
    pub fn new(n_particles: usize) -> Self {
        FilterSettings {
            n_particles,
            with_score: false,
            zeta: c(0.95),
            resampling: ResamplingScheme::Multinomial,
            keep_history: false,
        }
    }

    pub fn with_score(mut self, zeta: T) -> Self {
        self.with_score = true;
        self.zeta = zeta;
        self
    }
}

/// Filter result.
#[derive(Debug, Clone)]
pub struct FilterOutput<T> {
    /// log p̂(z_{1:T} | x) = Σ_t log(C_t/N).
    pub log_likelihood: T,
    /// ∇̂ log p̂(z_{1:T} | x) when the score recursion ran.
    pub score: Option<Vec<T>>,
    /// Final particle cloud.
    pub cloud: ParticleCloud<T>,
    /// Per-step log(C_t/N).
    pub step_log_normalizers: Vec<T>,
    pub history: Option<Vec<StepRecord<T>>>,
}

/// Runs the auxiliary particle filter.
pub fn run_apf<T, M, A, R>(
    model: &M,
    x: &UnconstrainedParams<T>,
    data: &ObservationSeries<T>,
    adapter: &A,
    settings: &FilterSettings<T>,
    rng: &mut R,
) -> Result<FilterOutput<T>>
where
    T: Scalar,
    M: StateSpaceModel<T>,
    A: ProposalAdapter<T, M>,
    R: Rng + ?Sized,
{
    let n = settings.n_particles;
    if n == 0 {
        return Err(Error::Config("need at least one particle".into()));
    }
    if settings.with_score && !(settings.zeta > T::zero() && settings.zeta <= T::one()) {
        return Err(Error::Config(format!(
            "shrinkage zeta must lie in (0, 1], got {}",
            settings.zeta
        )));
    }
    if data.obs_dim() != model.obs_dim() {
        return Err(Error::Config(format!(
            "observation dimension {} does not match model ({})",
            data.obs_dim(),
            model.obs_dim()
        )));
    }
    let ctx = model.prepare(x)?;
    let ns = model.state_dim();
    let ln_n = c::<T>(n as f64).ln();

    let mut states = vec![T::zero(); n * ns];
    let mut prev_states = vec![T::zero(); n * ns];
    let mut log_unnorm = vec![T::zero(); n];
    let mut log_w = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut prev_log_w = vec![T::zero(); n];
    let mut prev_w = vec![T::zero(); n];
    let mut log_xi = vec![T::zero(); n];
    let mut xi = vec![T::zero(); n];
    let mut ancestors: Vec<usize> = (0..n).collect();

    let mut score = if settings.with_score {
        Some(ScoreRecursion::new(n, model.n_params(), settings.zeta))
    } else {
        None
    };

    let mut log_lik = T::zero();
    let mut step_log_normalizers = Vec::with_capacity(data.len());
    let mut history: Option<Vec<StepRecord<T>>> = settings.keep_history.then(Vec::new);

    // Step 1: draw from the initial density, weight by the observation density.
    let z0 = data.row(0);
    for i in 0..n {
        model.sample_init(&ctx, rng, &mut states[i * ns..(i + 1) * ns]);
    }
    for i in 0..n {
        log_unnorm[i] = model.observation_logpdf(&ctx, &states[i * ns..(i + 1) * ns], z0);
    }
    let log_c = normalize_step(&log_unnorm, &mut log_w, &mut w, 1)?;
    log_lik += log_c - ln_n;
    step_log_normalizers.push(log_c - ln_n);
    if let Some(s) = score.as_mut() {
        s.init(model, &ctx, &states, z0)?;
    }
    push_history(&mut history, &states, &ancestors, &log_w, &w, log_c - ln_n);

    for t in 1..data.len() {
        let z = data.row(t);
        std::mem::swap(&mut states, &mut prev_states);
        std::mem::swap(&mut log_w, &mut prev_log_w);
        std::mem::swap(&mut w, &mut prev_w);

        // Auxiliary probabilities.
        adapter.aux_log_weights(model, &ctx, &prev_states, &prev_log_w, z, &mut log_xi);
        let log_xi_norm = log_sum_exp(&log_xi);
        if !log_xi_norm.is_finite() {
            return Err(if log_xi_norm == T::neg_infinity() {
                Error::DegenerateFilter { step: t + 1 }
            } else {
                Error::non_finite(format!("auxiliary weights at step {}", t + 1))
            });
        }
        for i in 0..n {
            log_xi[i] -= log_xi_norm;
            xi[i] = log_xi[i].exp();
        }

        // Resample, propagate, weight.
        let idx = match settings.resampling {
            ResamplingScheme::Multinomial => resample_multinomial(&xi, n, rng)?,
            ResamplingScheme::Stratified => resample_stratified(&xi, n, rng)?,
            ResamplingScheme::Systematic => resample_systematic(&xi, n, rng)?,
        };
        ancestors.copy_from_slice(&idx);

        for i in 0..n {
            let k = ancestors[i];
            let (prev, out) = (
                &prev_states[k * ns..(k + 1) * ns],
                &mut states[i * ns..(i + 1) * ns],
            );
            adapter.propose(model, &ctx, prev, z, rng, out);
        }
        for i in 0..n {
            let k = ancestors[i];
            let prev = &prev_states[k * ns..(k + 1) * ns];
            let st = &states[i * ns..(i + 1) * ns];
            let g = model.observation_logpdf(&ctx, st, z);
            let f = model.transition_logpdf(&ctx, prev, st);
            let q = adapter.proposal_logpdf(model, &ctx, prev, st, z);
            log_unnorm[i] = prev_log_w[k] + g + f - log_xi[k] - q;
        }
        let log_c = normalize_step(&log_unnorm, &mut log_w, &mut w, t + 1)?;
        log_lik += log_c - ln_n;
        step_log_normalizers.push(log_c - ln_n);

        if let Some(s) = score.as_mut() {
            s.update(model, &ctx, &prev_states, &prev_w, &ancestors, &states, z)?;
        }
        push_history(&mut history, &states, &ancestors, &log_w, &w, log_c - ln_n);
    }

    let score_vec = score.as_ref().map(|s| s.final_score(&w));
    let cloud = ParticleCloud {
        n_particles: n,
        state_dim: ns,
        states,
        log_weights: log_w,
        weights: w,
        ancestors,
        score_means: score.map(ScoreRecursion::into_means),
    };
    Ok(FilterOutput {
        log_likelihood: log_lik,
        score: score_vec,
        cloud,
        step_log_normalizers,
        history,
    })
}

/// Normalizes one step's unnormalized log weights. Returns log C_t.
fn normalize_step<T: Scalar>(
    log_unnorm: &[T],
    log_w: &mut [T],
    w: &mut [T],
    step: usize,
) -> Result<T> {
    if log_unnorm.iter().any(|v| v.is_nan()) {
        return Err(Error::non_finite(format!("particle weight at step {step}")));
    }
    let log_c = log_sum_exp(log_unnorm);
    if log_c == T::neg_infinity() {
        return Err(Error::DegenerateFilter { step });
    }
    if !log_c.is_finite() {
        return Err(Error::non_finite(format!("weight normalizer at step {step}")));
    }
    let mut sum = T::zero();
    for i in 0..log_unnorm.len() {
        log_w[i] = log_unnorm[i] - log_c;
        w[i] = log_w[i].exp();
        sum += w[i];
    }
    // Remove the residual rounding so the linear weights sum to one.
    for v in w.iter_mut() {
        *v /= sum;
    }
    Ok(log_c)
}

fn push_history<T: Scalar>(
    history: &mut Option<Vec<StepRecord<T>>>,
    states: &[T],
    ancestors: &[usize],
    log_w: &[T],
    w: &[T],
    log_normalizer: T,
) {
    if let Some(h) = history.as_mut() {
        h.push(StepRecord {
            states: states.to_vec(),
            ancestors: ancestors.to_vec(),
            log_weights: log_w.to_vec(),
            weights: w.to_vec(),
            log_normalizer,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn multinomial_point_mass() {
        let mut rng = seeded_rng(1);
        let idx = resample_multinomial(&[1.0, 0.0, 0.0], 50, &mut rng).unwrap();
        assert!(idx.iter().all(|&i| i == 0));
    }

    #[test]
    fn multinomial_uniform_counts_within_binomial_bound() {
        let mut rng = seeded_rng(2);
        let n = 20_000usize;
        let k = 10usize;
        let probs = vec![1.0 / k as f64; k];
        let idx = resample_multinomial(&probs, n, &mut rng).unwrap();
        let mut counts = vec![0usize; k];
        for i in idx {
            counts[i] += 1;
        }
        let expected = n as f64 / k as f64;
        let sd = (n as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 4.0 * sd, "count {c}");
        }
    }

    #[test]
    fn resampling_is_seed_deterministic() {
        let probs = [0.2, 0.3, 0.5];
        let a = resample_multinomial(&probs, 100, &mut seeded_rng(3)).unwrap();
        let b = resample_multinomial(&probs, 100, &mut seeded_rng(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_probability_is_rejected() {
        let mut rng = seeded_rng(4);
        assert!(resample_multinomial(&[0.5, -0.1, 0.6], 10, &mut rng).is_err());
        assert!(resample_multinomial(&[0.0, 0.0], 10, &mut rng).is_err());
    }

    #[test]
    fn stratified_and_systematic_hit_every_heavy_atom() {
        let mut rng = seeded_rng(5);
        let probs = [0.25, 0.25, 0.25, 0.25];
        let s = resample_stratified(&probs, 4, &mut rng).unwrap();
        assert_eq!(s, vec![0, 1, 2, 3]);
        let y = resample_systematic(&probs, 4, &mut rng).unwrap();
        assert_eq!(y, vec![0, 1, 2, 3]);
    }
}
