//! The pseudo-marginal chain driver and the pilot covariance estimator.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, SymMatrix};
use crate::mcmc::estimator::PosteriorEstimator;
use crate::mcmc::kernel::{acceptance_log_ratio, propose, ChainState, KernelConfig};
use crate::scalar::{c, Scalar};
use crate::ssm::UnconstrainedParams;

/// Chain run configuration.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub iterations: usize,
    pub burn_in: usize,
}

impl RunSettings {
    pub fn new(iterations: usize, burn_in: usize) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::Config("need at least one iteration".into()));
        }
        if burn_in >= iterations {
            return Err(Error::Config(format!(
                "burn-in {burn_in} must be smaller than the iteration count {iterations}"
            )));
        }
        Ok(RunSettings {
            iterations,
            burn_in,
        })
    }
}

/// Recorded chain: one row per iteration (after the initial state).
#[derive(Debug, Clone)]
pub struct ChainTrace<T> {
    n_params: usize,
    states: Vec<T>,
    log_post: Vec<T>,
    accepted: Vec<bool>,
    sq_jumps: Vec<T>,
    burn_in: usize,
    /// Wall-clock of the sampling loop (timing metadata, excluded from
    /// reproducibility comparisons).
    pub wall_secs: f64,
}

impl<T: Scalar> ChainTrace<T> {
    pub fn len(&self) -> usize {
        self.log_post.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_post.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    #[inline]
    pub fn state(&self, j: usize) -> &[T] {
        &self.states[j * self.n_params..(j + 1) * self.n_params]
    }

    pub fn log_post(&self) -> &[T] {
        &self.log_post
    }

    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    pub fn sq_jumps(&self) -> &[T] {
        &self.sq_jumps
    }

    pub fn acceptance_rate(&self) -> T {
        let acc = self.accepted.iter().filter(|&&a| a).count();
        c::<T>(acc as f64) / c::<T>(self.len() as f64)
    }

    /// Values of one parameter component, post burn-in.
    pub fn component(&self, p: usize) -> Vec<T> {
        (self.burn_in..self.len()).map(|j| self.state(j)[p]).collect()
    }

    /// Post burn-in state rows.
    pub fn post_burn_in_rows(&self) -> Vec<&[T]> {
        (self.burn_in..self.len()).map(|j| self.state(j)).collect()
    }
}

/// Runs one pseudo-marginal chain.
///
/// Estimates for the current state are frozen until the next acceptance:
/// they are computed once per proposal and reused verbatim, never
/// recomputed, which is what keeps the joint-space target invariant. If the
/// initial point is degenerate it is re-drawn (componentwise jitter of sd
/// 0.1) up to 100 times before giving up.
pub fn run_chain<T, E, R>(
    estimator: &E,
    kernel: &KernelConfig<T>,
    init: &UnconstrainedParams<T>,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<ChainTrace<T>>
where
    T: Scalar,
    E: PosteriorEstimator<T>,
    R: Rng + ?Sized,
{
    let n = estimator.n_params();
    if kernel.dim() != n || init.dim() != n {
        return Err(Error::Config(format!(
            "dimension mismatch: estimator {n}, kernel {}, init {}",
            kernel.dim(),
            init.dim()
        )));
    }
    let want_grad = kernel.kind.uses_gradient();

    let start = Instant::now();
    let mut current = init_state(estimator, init, want_grad, rng)?;

    let j_total = settings.iterations;
    let mut trace = ChainTrace {
        n_params: n,
        states: Vec::with_capacity(j_total * n),
        log_post: Vec::with_capacity(j_total),
        accepted: Vec::with_capacity(j_total),
        sq_jumps: Vec::with_capacity(j_total),
        burn_in: settings.burn_in,
        wall_secs: 0.0,
    };

    for _ in 0..j_total {
        let (y, fwd_logq) = propose(&current, kernel, rng)?;
        let est = estimator.estimate(&y, want_grad, rng)?;
        let proposed = ChainState::new(y, est.log_post, est.grad)?;
        let log_ratio = if proposed.is_degenerate() {
            T::neg_infinity()
        } else {
            let rev_logq = kernel.proposal_logpdf(&proposed, &current.x)?;
            acceptance_log_ratio(&current, &proposed, fwd_logq, rev_logq)
        };
        let accept = log_ratio >= T::zero() || T::sample_uniform(rng).ln() < log_ratio;
        let sq_jump = if accept {
            current
                .x
                .values()
                .iter()
                .zip(proposed.x.values())
                .map(|(&a, &b)| (b - a) * (b - a))
                .sum()
        } else {
            T::zero()
        };
        if accept {
            current = proposed;
        }
        trace.states.extend_from_slice(current.x.values());
        trace.log_post.push(current.log_post);
        trace.accepted.push(accept);
        trace.sq_jumps.push(sq_jump);
    }
    trace.wall_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}

fn init_state<T, E, R>(
    estimator: &E,
    init: &UnconstrainedParams<T>,
    want_grad: bool,
    rng: &mut R,
) -> Result<ChainState<T>>
where
    T: Scalar,
    E: PosteriorEstimator<T>,
    R: Rng + ?Sized,
{
    let mut point = init.clone();
    for attempt in 0..100 {
        let est = estimator.estimate(&point, want_grad, rng)?;
        if est.log_post.is_finite() {
            return ChainState::new(point, est.log_post, est.grad);
        }
        let _ = attempt;
        let jittered: Vec<T> = init
            .values()
            .iter()
            .map(|&v| v + c::<T>(0.1) * T::sample_std_normal(rng))
            .collect();
        point = UnconstrainedParams::new(jittered)?;
    }
    Err(Error::DegenerateInput(
        "could not find a non-degenerate initial state in 100 attempts".into(),
    ))
}

/// Empirical posterior covariance from a pilot trace, ridge-regularized to
/// SPD (ε = 1e-8 · trace/n on the diagonal).
pub fn pilot_covariance<T: Scalar>(trace: &ChainTrace<T>) -> Result<SymMatrix<T>> {
    let n = trace.n_params();
    let rows = trace.post_burn_in_rows();
    if rows.len() < 10 * n {
        return Err(Error::DegenerateInput(format!(
            "pilot trace too short: {} post-burn-in rows for {n} parameters",
            rows.len()
        )));
    }
    let first = rows[0];
    if rows.iter().all(|r| r.iter().zip(first).all(|(a, b)| a == b)) {
        return Err(Error::DegenerateInput(
            "pilot trace is constant; cannot estimate a covariance".into(),
        ));
    }
    let mut cov = sample_covariance(&rows, n)?;
    let ridge = c::<T>(1e-8) * cov.trace() / c::<T>(n as f64);
    for i in 0..n {
        let v = cov.get(i, i) + ridge;
        cov.set(i, i, v);
    }
    cov.cholesky().map_err(|_| {
        Error::DegenerateInput("pilot covariance is rank-deficient beyond repair".into())
    })?;
    Ok(cov)
}
