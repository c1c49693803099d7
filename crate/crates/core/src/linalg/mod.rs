//! Dense eigensolvers used by the operator and pencil computations.

pub mod nonsymmetric;
pub mod symmetric;

pub use nonsymmetric::ComplexEigen;
pub use symmetric::{count_below, SymmetricEigen};
