//! Nonparametric n-point interaction estimators for discrete
//! equilibrium systems, with the simulators and diagnostics needed to
//! check them against known Hamiltonians.

pub mod error;
pub mod estimators;
pub mod independence;
pub mod rbm;
pub mod simulators;
pub mod store;
pub mod uncertainty;

pub use error::{Error, Result};
pub use store::{Assignment, DataView, SampleMatrix, VariableKind, VariableMeta};
