//! O(N) score estimation via Fisher's identity with a Rao-Blackwellized
//! kernel-shrinkage recursion, fused into the particle filter loop.
//!
//! Each particle carries a mean vector m_t^{(i)}; the update is
//!
//! ```text
//! m_t^{(i)} = ζ m_{t-1}^{(k_i)} + (1-ζ) Σ_j w_{t-1}^{(j)} m_{t-1}^{(j)}
//!           + ∇ log g(z_t | s_t^{(i)}) + ∇ log f(s_t^{(i)} | s_{t-1}^{(k_i)})
//! ```
//!
//! and the score estimate is the weight-averaged row. With ζ = 1 this is
//! exactly ancestral-path accumulation; the kernel bandwidth of the
//! underlying density estimate never enters the means and is not computed.

use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::{run_apf, FilterSettings, ProposalAdapter};
use crate::scalar::{c, Scalar};
use crate::ssm::{ObservationSeries, StateSpaceModel, UnconstrainedParams};
use crate::stats;

/// Per-particle score means plus the shrinkage parameter.
#[derive(Debug, Clone)]
pub struct ScoreRecursion<T> {
    means: Vec<T>,
    scratch: Vec<T>,
    grad_a: Vec<T>,
    grad_b: Vec<T>,
    n_particles: usize,
    n_params: usize,
    zeta: T,
}

impl<T: Scalar> ScoreRecursion<T> {
    pub fn new(n_particles: usize, n_params: usize, zeta: T) -> Self {
        ScoreRecursion {
            means: vec![T::zero(); n_particles * n_params],
            scratch: vec![T::zero(); n_particles * n_params],
            grad_a: vec![T::zero(); n_params],
            grad_b: vec![T::zero(); n_params],
            n_particles,
            n_params,
            zeta,
        }
    }

    #[inline]
    pub fn zeta(&self) -> T {
        self.zeta
    }

    /// Row of particle i.
    #[inline]
    pub fn mean(&self, i: usize) -> &[T] {
        &self.means[i * self.n_params..(i + 1) * self.n_params]
    }

    pub fn into_means(self) -> Vec<T> {
        self.means
    }

    /// m_1^{(i)} = ∇ log g(z_1 | s_1^{(i)}) + ∇ log μ(s_1^{(i)}).
    pub fn init<M: StateSpaceModel<T>>(
        &mut self,
        model: &M,
        ctx: &M::Ctx,
        states: &[T],
        obs: &[T],
    ) -> Result<()> {
        let ns = model.state_dim();
        for i in 0..self.n_particles {
            let s = &states[i * ns..(i + 1) * ns];
            model.grad_observation(ctx, s, obs, &mut self.grad_a);
            model.grad_init(ctx, s, &mut self.grad_b);
            let row = &mut self.means[i * self.n_params..(i + 1) * self.n_params];
            for p in 0..self.n_params {
                row[p] = self.grad_a[p] + self.grad_b[p];
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite(format!("score mean of particle {i} at step 1")));
            }
        }
        Ok(())
    }

    /// One recursion step with the ancestors drawn by the filter.
    pub fn update<M: StateSpaceModel<T>>(
        &mut self,
        model: &M,
        ctx: &M::Ctx,
        prev_states: &[T],
        prev_weights: &[T],
        ancestors: &[usize],
        states: &[T],
        obs: &[T],
    ) -> Result<()> {
        let ns = model.state_dim();
        let np = self.n_params;
        // Shrinkage target: the weighted mean row, computed once per step.
        let mut shrink = vec![T::zero(); np];
        for i in 0..self.n_particles {
            let wi = prev_weights[i];
            let row = &self.means[i * np..(i + 1) * np];
            for p in 0..np {
                shrink[p] += wi * row[p];
            }
        }
        let one_minus = T::one() - self.zeta;
        for i in 0..self.n_particles {
            let k = ancestors[i];
            let s = &states[i * ns..(i + 1) * ns];
            let prev = &prev_states[k * ns..(k + 1) * ns];
            model.grad_observation(ctx, s, obs, &mut self.grad_a);
            model.grad_transition(ctx, prev, s, &mut self.grad_b);
            let src = &self.means[k * np..(k + 1) * np];
            let dst = &mut self.scratch[i * np..(i + 1) * np];
            for p in 0..np {
                dst[p] = self.zeta * src[p] + one_minus * shrink[p] + self.grad_a[p] + self.grad_b[p];
            }
            if dst.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite(format!("score mean of particle {i}")));
            }
        }
        std::mem::swap(&mut self.means, &mut self.scratch);
        Ok(())
    }

    /// ∇ log p̂(z_{1:t} | x) = Σ_i w_t^{(i)} m_t^{(i)}.
    pub fn final_score(&self, weights: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_params];
        for i in 0..self.n_particles {
            let wi = weights[i];
            let row = &self.means[i * self.n_params..(i + 1) * self.n_params];
            for p in 0..self.n_params {
                out[p] += wi * row[p];
            }
        }
        out
    }
}

/// One row of a score variance study: per-component sample variance of the
/// score estimate at a given series length.
#[derive(Debug, Clone)]
pub struct ScoreVarianceRow<T> {
    pub t_len: usize,
    pub component_variance: Vec<T>,
    /// Sum of the per-component variances.
    pub total_variance: T,
}

/// Replicates the filter on prefixes of `data` and tabulates score variances.
///
/// The log-log slope of total variance against T is ≈ 2 for ζ = 1 and ≈ 1
/// for ζ < 1 with enough shrinkage.
#[allow(clippy::too_many_arguments)]
pub fn score_variance_study<T, M, A, R>(
    model: &M,
    x: &UnconstrainedParams<T>,
    data: &ObservationSeries<T>,
    adapter: &A,
    n_particles: usize,
    zeta: T,
    t_grid: &[usize],
    replicates: usize,
    rng: &mut R,
) -> Result<Vec<ScoreVarianceRow<T>>>
where
    T: Scalar,
    M: StateSpaceModel<T>,
    A: ProposalAdapter<T, M>,
    R: Rng + ?Sized,
{
    if replicates < 2 {
        return Err(Error::Config("need at least two replicates".into()));
    }
    let np = model.n_params();
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t_len in t_grid {
        if t_len > data.len() {
            return Err(Error::Config(format!(
                "grid length {t_len} exceeds series length {}",
                data.len()
            )));
        }
        let prefix: Vec<T> = (0..t_len).flat_map(|t| data.row(t).to_vec()).collect();
        let prefix = ObservationSeries::new(prefix, data.obs_dim())?;
        let settings = FilterSettings::new(n_particles).with_score(zeta);
        let mut scores = vec![Vec::with_capacity(replicates); np];
        for _ in 0..replicates {
            let out = run_apf(model, x, &prefix, adapter, &settings, rng)?;
            let s = out.score.expect("score requested");
            for (p, v) in s.into_iter().enumerate() {
                scores[p].push(v);
            }
        }
        let component_variance: Vec<T> = scores.iter().map(|v| stats::variance(v)).collect();
        let total_variance = component_variance.iter().cloned().sum();
        rows.push(ScoreVarianceRow {
            t_len,
            component_variance,
            total_variance,
        });
    }
    Ok(rows)
}

/// Log-log slope of total variance against T for a study result.
pub fn variance_growth_slope<T: Scalar>(rows: &[ScoreVarianceRow<T>]) -> T {
    let x: Vec<T> = rows.iter().map(|r| c::<T>(r.t_len as f64).ln()).collect();
    let y: Vec<T> = rows.iter().map(|r| r.total_variance.ln()).collect();
    stats::regression_slope(&x, &y)
}
