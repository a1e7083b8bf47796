//! Quaternion-valued simulation of qubit registers and gradient-based
//! learning of the circuits that act on them.
//!
//! Qubits are unit pure quaternions, gates are quaternion involutions that
//! become linear maps on augmented vectors `[q; qᶦ; qʲ; qᵏ]`, and measurement
//! is a quadratic functional of the augmented register. [`learner`] fits a
//! circuit matrix to target measurements with HR-calculus gradient descent,
//! and [`harness`] drives the reference experiments.

pub mod error;
pub mod harness;
pub mod learner;
pub mod measurement;
pub mod quat;
pub mod qubit;

pub use error::{Error, Result};
pub use quat::{Involution, QuatMatrix, QuatVector, Quaternion};
