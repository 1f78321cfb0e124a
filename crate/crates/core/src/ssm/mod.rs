//! Model-agnostic contracts for state-space models: parameter vectors on the
//! unconstrained space, constrained/unconstrained transforms, observation
//! series, and the [`StateSpaceModel`] trait every concrete model implements.

mod model;
mod transform;

pub use model::{ObservationSeries, StateSpaceModel, UnconstrainedParams};
pub use transform::{ComponentTransform, ParameterTransform};
