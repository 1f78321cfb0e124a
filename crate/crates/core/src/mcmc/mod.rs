//! Pseudo-marginal Metropolis–Hastings on the unconstrained parameter space:
//! particle random walk, particle Langevin and idealized particle Langevin
//! kernels, with frozen current-state estimates between acceptances.

mod chain;
mod estimator;
mod kernel;

pub use chain::{pilot_covariance, run_chain, ChainTrace, RunSettings};
pub use estimator::{
    IdealizedLgssEstimator, KalmanEstimator, ParticleEstimator, PosteriorEstimate,
    PosteriorEstimator,
};
pub use kernel::{
    acceptance_log_ratio, propose, propose_with_noise, ChainState, KernelConfig, KernelKind,
    LANGEVIN_SCALE_CONSTANT, RANDOM_WALK_SCALE_CONSTANT,
};
