//! Particle Metropolis-adjusted Langevin samplers for state-space models.
//!
//! The crate bundles four layers that build on each other:
//!
//! * [`ssm`] — model-agnostic contracts: unconstrained parameter vectors,
//!   constrained/unconstrained transforms, and the [`ssm::StateSpaceModel`]
//!   trait (densities, parameter gradients, prior).
//! * [`models`] — concrete models: a linear Gaussian state-space model with
//!   an exact Kalman oracle for its likelihood and score, and a two-component
//!   mixture of autoregressive experts.
//! * [`filter`] / [`score`] — the auxiliary particle filter (bootstrap or
//!   fully adapted proposals) producing unbiased likelihood estimates, with a
//!   fused O(N) Rao-Blackwellized score recursion.
//! * [`mcmc`] / [`diagnostics`] / [`theory`] — pseudo-marginal kernels
//!   (particle random walk, particle Langevin, idealized Langevin), chain and
//!   estimator diagnostics, and executable numerics for the limiting
//!   acceptance-rate and efficiency theory (optimal tuning constants, maximin
//!   acceptance rates, product-target limit simulations).
//!
//! All numerics are generic over the scalar type through [`scalar::Scalar`]
//! (`f64` is the working precision; `f32` is supported for the core math).
//! Concrete `f64` aliases for the main entry types live at the crate root.

pub mod diagnostics;
pub mod error;
pub mod filter;
pub mod io;
pub mod linalg;
pub mod mcmc;
pub mod models;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod score;
pub mod ssm;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default working precision of the crate.
pub type Real = f64;

/// `f64` aliases for the most commonly used generic types.
pub type UnconstrainedParams = ssm::UnconstrainedParams<Real>;
pub type ParameterTransform = ssm::ParameterTransform<Real>;
pub type ObservationSeries = ssm::ObservationSeries<Real>;
pub type LgssModel = models::lgss::LgssModel<Real>;
pub type LgssParams = models::lgss::LgssParams<Real>;
pub type MixtureModel = models::mixture::MixtureModel<Real>;
pub type MixtureExpertsParams = models::mixture::MixtureExpertsParams<Real>;
pub type FilterOutput = filter::FilterOutput<Real>;
pub type ChainTrace = mcmc::ChainTrace<Real>;
pub type KernelConfig = mcmc::KernelConfig<Real>;
pub type Roughness = theory::Roughness<Real>;
pub type RegimeSpec = theory::RegimeSpec<Real>;
