//! Chain- and estimator-quality diagnostics: effective sample size, expected
//! squared jumping distance, log-posterior noise studies, and the ΔA/ΔB/ΔC
//! regime decomposition of the proposed log-posterior change.

use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::{run_apf, FilterSettings, ProposalAdapter};
use crate::mcmc::{ChainTrace, KernelConfig, PosteriorEstimator};
use crate::scalar::{c, Scalar};
use crate::ssm::{ObservationSeries, StateSpaceModel, UnconstrainedParams};
use crate::stats;

/// Effective sample size result.
#[derive(Debug, Clone, Copy)]
pub struct EssResult<T> {
    pub ess: T,
    /// Integrated autocorrelation time J/ESS before capping.
    pub iact: T,
    /// ESS was capped at the series length (antithetic chains).
    pub capped: bool,
    /// The series was constant; ESS is reported as 0.
    pub degenerate: bool,
}

/// ESS with Geyer's initial monotone sequence truncation, capped at J.
pub fn ess<T: Scalar>(series: &[T]) -> Result<EssResult<T>> {
    let j = series.len();
    if j < 10 {
        return Err(Error::Config(format!("ESS needs at least 10 values, got {j}")));
    }
    let m = stats::mean(series);
    let c0: T = series.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / c::<T>(j as f64);
    if c0 <= T::zero() || !c0.is_finite() {
        return Ok(EssResult {
            ess: T::zero(),
            iact: T::infinity(),
            capped: false,
            degenerate: true,
        });
    }
    let acov = |k: usize| -> T {
        let mut s = T::zero();
        for t in 0..j - k {
            s += (series[t] - m) * (series[t + k] - m);
        }
        s / c::<T>(j as f64)
    };
    // Geyer pairs Γ_m = ρ_{2m} + ρ_{2m+1}: keep while positive, then force
    // the sequence monotone non-increasing.
    let mut gammas: Vec<T> = Vec::new();
    let mut k = 0usize;
    while k + 1 <= j / 2 {
        let g = (acov(k) + acov(k + 1)) / c0;
        if g <= T::zero() {
            break;
        }
        gammas.push(g);
        k += 2;
    }
    let mut running = T::infinity();
    let mut tau = -T::one();
    for g in &gammas {
        running = running.min(*g);
        tau += c::<T>(2.0) * running;
    }
    let jt = c::<T>(j as f64);
    if tau < T::one() {
        // Antithetic or supra-efficient: cap at the series length.
        return Ok(EssResult {
            ess: jt,
            iact: tau,
            capped: true,
            degenerate: false,
        });
    }
    Ok(EssResult {
        ess: jt / tau,
        iact: tau,
        capped: false,
        degenerate: false,
    })
}

/// Mean squared jump per iteration; rejected moves contribute zero.
pub fn esjd<T: Scalar>(trace: &ChainTrace<T>) -> Result<T> {
    if trace.len() < 2 {
        return Err(Error::Config("ESJD needs a trace of length >= 2".into()));
    }
    // First row's jump is measured from the initial state, not a recorded
    // row; skip it so the estimate is exactly mean ||x_{j+1} - x_j||².
    let jumps = &trace.sq_jumps()[1..];
    Ok(jumps.iter().cloned().sum::<T>() / c::<T>(jumps.len() as f64))
}

/// Summary of repeated log-likelihood estimates at one (point, N) cell.
#[derive(Debug, Clone)]
pub struct NoiseRow<T> {
    pub point_id: usize,
    pub n_particles: usize,
    pub mean_logpost: T,
    pub var_logpost: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

/// Noise-study report over points × particle counts.
#[derive(Debug, Clone)]
pub struct NoiseStudyReport<T> {
    pub rows: Vec<NoiseRow<T>>,
    /// Least-squares slope of log10 var against log10 N at the reference
    /// (first) point.
    pub slope_log10_at_reference: T,
    /// (point, N) cells dropped because every replicate degenerated.
    pub dropped: Vec<(usize, usize)>,
}

impl<T: Scalar> NoiseStudyReport<T> {
    pub fn row(&self, point_id: usize, n_particles: usize) -> Option<&NoiseRow<T>> {
        self.rows
            .iter()
            .find(|r| r.point_id == point_id && r.n_particles == n_particles)
    }
}

/// Repeatedly estimates the log-likelihood at each point and particle count
/// and summarizes the noise distribution.
#[allow(clippy::too_many_arguments)]
pub fn noise_study<T, M, A, R>(
    model: &M,
    data: &ObservationSeries<T>,
    points: &[UnconstrainedParams<T>],
    adapter: &A,
    n_grid: &[usize],
    replicates: usize,
    rng: &mut R,
) -> Result<NoiseStudyReport<T>>
where
    T: Scalar,
    M: StateSpaceModel<T>,
    A: ProposalAdapter<T, M>,
    R: Rng + ?Sized,
{
    if replicates < 10 {
        return Err(Error::Config("noise study needs at least 10 replicates".into()));
    }
    if points.is_empty() || n_grid.is_empty() {
        return Err(Error::Config("noise study needs points and a particle grid".into()));
    }
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for (pid, x) in points.iter().enumerate() {
        for &n in n_grid {
            let settings = FilterSettings::new(n);
            let mut values = Vec::with_capacity(replicates);
            for _ in 0..replicates {
                match run_apf(model, x, data, adapter, &settings, rng) {
                    Ok(out) => values.push(out.log_likelihood),
                    Err(Error::DegenerateFilter { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            if values.len() < 2 {
                dropped.push((pid, n));
                continue;
            }
            rows.push(NoiseRow {
                point_id: pid,
                n_particles: n,
                mean_logpost: stats::mean(&values),
                var_logpost: stats::variance(&values),
                skewness: stats::skewness(&values),
                excess_kurtosis: stats::excess_kurtosis(&values),
            });
        }
    }
    // Variance-vs-N slope at the reference point.
    let ref_rows: Vec<&NoiseRow<T>> = rows.iter().filter(|r| r.point_id == 0).collect();
    let slope = if ref_rows.len() >= 2 {
        let lx: Vec<T> = ref_rows
            .iter()
            .map(|r| c::<T>(r.n_particles as f64).log10())
            .collect();
        let ly: Vec<T> = ref_rows.iter().map(|r| r.var_logpost.log10()).collect();
        stats::regression_slope(&lx, &ly)
    } else {
        T::nan()
    };
    Ok(NoiseStudyReport {
        rows,
        slope_log10_at_reference: slope,
        dropped,
    })
}

/// One replicate of the regime decomposition at one posterior point.
#[derive(Debug, Clone, Copy)]
pub struct DeltaRow<T> {
    pub point_id: usize,
    pub rep: usize,
    /// Change in the exact log posterior from the exact-gradient move.
    pub delta_a: T,
    /// Additional change from using the estimated gradient (same noise draw).
    pub delta_b: T,
    /// Log-posterior estimation error at the proposed point.
    pub delta_c: T,
}

/// Median of |v| over a slice.
pub fn median_abs<T: Scalar>(values: &[T]) -> T {
    let mut v: Vec<T> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite deltas"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / c(2.0)
    }
}

/// Computes ΔA/ΔB/ΔC at each point: x* uses the exact gradient, x′ the
/// estimated one with the *same* Gaussian draw, and ΔC compares a fresh
/// noisy estimate at x′ with the exact value there. The current-state log
/// posterior is taken as known (no noise at x).
#[allow(clippy::too_many_arguments)]
pub fn regime_deltas<T, EX, NO, R>(
    exact: &EX,
    noisy: &NO,
    points: &[UnconstrainedParams<T>],
    kernel: &KernelConfig<T>,
    replicates: usize,
    rng: &mut R,
) -> Result<Vec<DeltaRow<T>>>
where
    T: Scalar,
    EX: PosteriorEstimator<T>,
    NO: PosteriorEstimator<T>,
    R: Rng + ?Sized,
{
    use crate::mcmc::{propose_with_noise, ChainState};
    if points.is_empty() || replicates == 0 {
        return Err(Error::Config("regime study needs points and replicates".into()));
    }
    let n = exact.n_params();
    let mut rows = Vec::with_capacity(points.len() * replicates);
    for (pid, x) in points.iter().enumerate() {
        let base = exact.estimate(x, true, rng)?;
        if !base.log_post.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "exact reference degenerate at point {pid}"
            )));
        }
        let g_exact = base
            .grad
            .clone()
            .ok_or_else(|| Error::Config("exact estimator must provide gradients".into()))?;
        let exact_state = ChainState::new(x.clone(), base.log_post, Some(g_exact))?;
        for rep in 0..replicates {
            let est = noisy.estimate(x, true, rng)?;
            if !est.log_post.is_finite() {
                continue;
            }
            let noisy_state = ChainState::new(x.clone(), est.log_post, est.grad)?;
            let z: Vec<T> = (0..n).map(|_| T::sample_std_normal(rng)).collect();
            let (x_star, _) = propose_with_noise(&exact_state, kernel, &z)?;
            let (x_prime, _) = propose_with_noise(&noisy_state, kernel, &z)?;
            let lp_star = exact.estimate(&x_star, false, rng)?.log_post;
            let lp_prime = exact.estimate(&x_prime, false, rng)?.log_post;
            let lp_hat_prime = noisy.estimate(&x_prime, false, rng)?.log_post;
            rows.push(DeltaRow {
                point_id: pid,
                rep,
                delta_a: lp_star - base.log_post,
                delta_b: lp_prime - lp_star,
                delta_c: lp_hat_prime - lp_prime,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::DegenerateInput(
            "every regime-delta replicate degenerated".into(),
        ));
    }
    Ok(rows)
}
