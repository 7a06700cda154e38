//! Simulation of a qubit undergoing sequential collisions with a correlated
//! two-qubit environment, the trace-distance non-Markovianity witness, and a
//! pulse-level NMR back-end that reproduces the collision circuit.
//!
//! Tensor order is `system ⊗ env1 ⊗ env2`; qubit 0 is the most significant
//! bit of a row index.

pub mod collision;
pub mod error;
pub mod linalg;
pub mod nmrsim;
pub mod resolution;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{Axis, ComplexMatrix};
pub use states::{BlochVector, DensityMatrix, EnvFlavor, EnvSpec};
