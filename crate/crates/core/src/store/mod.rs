//! Sample storage and the counting queries every estimator reduces to.

mod bits;
pub mod csv;
mod matrix;
pub mod packed;

pub use bits::{BitColumn, Mask};
pub use matrix::{
    Assignment, Basis, ConditionalMean, DataView, SampleMatrix, SampleMatrixBuilder, VariableKind, VariableMeta,
};
