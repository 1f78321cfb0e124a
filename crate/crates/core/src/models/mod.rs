//! Concrete state-space models.

pub mod lgss;
pub mod mixture;
