//! Proposal kernels and the Metropolis–Hastings acceptance ratio.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SymMatrix};
use crate::scalar::{c, ln_two_pi, Scalar};
use crate::ssm::UnconstrainedParams;

/// Asymptotically optimal random-walk scale constant (λ² = γ² 2.562² / n).
pub const RANDOM_WALK_SCALE_CONSTANT: f64 = 2.562;
/// Asymptotically optimal Langevin scale constant (λ² = γ² 1.125² n^{-1/3}).
pub const LANGEVIN_SCALE_CONSTANT: f64 = 1.125;

/// Which proposal the kernel uses.
///
/// `IdealizedLangevin` is the Langevin proposal driven by an exact gradient
/// (paired with a noisy likelihood estimator); the kernel math is identical
/// to `Langevin`, the difference is the estimator it is wired to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    RandomWalk,
    Langevin,
    IdealizedLangevin,
}

impl KernelKind {
    pub fn uses_gradient(self) -> bool {
        !matches!(self, KernelKind::RandomWalk)
    }

    /// (c, p) of the dimension rule λ² = γ² c² n^{-p}.
    fn scale_rule(self) -> (f64, f64) {
        match self {
            KernelKind::RandomWalk => (RANDOM_WALK_SCALE_CONSTANT, 1.0),
            KernelKind::Langevin | KernelKind::IdealizedLangevin => {
                (LANGEVIN_SCALE_CONSTANT, 1.0 / 3.0)
            }
        }
    }
}

/// One chain state: position, frozen log-posterior estimate and (for
/// gradient kernels) the frozen gradient estimate from the same filter run.
#[derive(Debug, Clone)]
pub struct ChainState<T> {
    pub x: UnconstrainedParams<T>,
    /// log π̂(x) = log p̂(z|x) + log prior (Jacobian included); −∞ when the
    /// prior has no mass or the filter degenerated.
    pub log_post: T,
    pub grad: Option<Vec<T>>,
}

impl<T: Scalar> ChainState<T> {
    pub fn new(x: UnconstrainedParams<T>, log_post: T, grad: Option<Vec<T>>) -> Result<Self> {
        if log_post.is_nan() {
            return Err(Error::non_finite("log-posterior estimate"));
        }
        if log_post.is_finite() {
            if let Some(g) = &grad {
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::non_finite("gradient estimate"));
                }
            }
        }
        Ok(ChainState { x, log_post, grad })
    }

    pub fn is_degenerate(&self) -> bool {
        self.log_post == T::neg_infinity()
    }
}

/// Proposal configuration: kernel kind, scale multiplier γ and the SPD
/// preconditioning matrix V̂. The step size follows the dimension rule
/// λ² = γ² c² n^{-p}, and V̂ enters both the drift (λ²/2 · V̂ ĝ) and the
/// noise covariance (λ² V̂).
#[derive(Debug, Clone)]
pub struct KernelConfig<T> {
    pub kind: KernelKind,
    pub gamma: T,
    vhat: SymMatrix<T>,
    chol: Cholesky<T>,
}

impl<T: Scalar> KernelConfig<T> {
    pub fn new(kind: KernelKind, gamma: T, vhat: SymMatrix<T>) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
        }
        let chol = vhat.cholesky()?;
        Ok(KernelConfig {
            kind,
            gamma,
            vhat,
            chol,
        })
    }

    pub fn vhat(&self) -> &SymMatrix<T> {
        &self.vhat
    }

    pub fn dim(&self) -> usize {
        self.vhat.n()
    }

    /// λ² for the configured dimension.
    pub fn lambda2(&self) -> T {
        let (cst, p) = self.kind.scale_rule();
        let n = self.dim() as f64;
        self.gamma * self.gamma * c::<T>(cst * cst * n.powf(-p))
    }

    /// Proposal mean given the current state.
    fn mean(&self, state: &ChainState<T>) -> Result<Vec<T>> {
        let n = self.dim();
        let mut m = state.x.values().to_vec();
        if self.kind.uses_gradient() {
            let g = state.grad.as_ref().ok_or_else(|| {
                Error::Config("Langevin kernel needs a gradient estimate".into())
            })?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite("gradient estimate in proposal"));
            }
            let half_l2 = self.lambda2() / c(2.0);
            let mut vg = vec![T::zero(); n];
            self.vhat.matvec(g, &mut vg);
            for i in 0..n {
                m[i] += half_l2 * vg[i];
            }
        }
        Ok(m)
    }

    /// log N(y; mean(state), λ² V̂).
    pub fn proposal_logpdf(&self, state: &ChainState<T>, y: &UnconstrainedParams<T>) -> Result<T> {
        let n = self.dim();
        let m = self.mean(state)?;
        let l2 = self.lambda2();
        let diff: Vec<T> = y
            .values()
            .iter()
            .zip(&m)
            .map(|(&a, &b)| a - b)
            .collect();
        let mut solved = vec![T::zero(); n];
        self.chol.forward_solve(&diff, &mut solved);
        let quad: T = solved.iter().map(|&v| v * v).sum();
        let half = c::<T>(0.5);
        Ok(-half * (c::<T>(n as f64) * (ln_two_pi::<T>() + l2.ln()) + quad / l2)
            - self.chol.half_log_det())
    }
}

/// Deterministic proposal for a given standard-normal vector `z`:
/// y = x + (λ²/2) V̂ ĝ + λ L z. Returns the proposal and its forward log q.
pub fn propose_with_noise<T: Scalar>(
    state: &ChainState<T>,
    config: &KernelConfig<T>,
    z: &[T],
) -> Result<(UnconstrainedParams<T>, T)> {
    let n = config.dim();
    if state.x.dim() != n || z.len() != n {
        return Err(Error::Config("proposal dimension mismatch".into()));
    }
    let m = config.mean(state)?;
    let lambda = config.lambda2().sqrt();
    let mut noise = vec![T::zero(); n];
    config.chol.lower_matvec(z, &mut noise);
    let y: Vec<T> = m.iter().zip(&noise).map(|(&mi, &ni)| mi + lambda * ni).collect();
    let y = UnconstrainedParams::new(y)?;
    let fwd = config.proposal_logpdf(state, &y)?;
    Ok((y, fwd))
}

/// Random proposal draw.
pub fn propose<T: Scalar, R: Rng + ?Sized>(
    state: &ChainState<T>,
    config: &KernelConfig<T>,
    rng: &mut R,
) -> Result<(UnconstrainedParams<T>, T)> {
    let z: Vec<T> = (0..config.dim()).map(|_| T::sample_std_normal(rng)).collect();
    propose_with_noise(state, config, &z)
}

/// log of the Metropolis–Hastings ratio
/// log π̂(y) − log π̂(x) + log q(x|y) − log q(y|x).
///
/// A degenerate proposal yields −∞ (certain rejection). The reverse density
/// must be evaluated with the gradient estimate produced by the same filter
/// run that produced log π̂(y).
pub fn acceptance_log_ratio<T: Scalar>(
    current: &ChainState<T>,
    proposed: &ChainState<T>,
    forward_logq: T,
    reverse_logq: T,
) -> T {
    if proposed.is_degenerate() {
        return T::neg_infinity();
    }
    proposed.log_post - current.log_post + reverse_logq - forward_logq
}
