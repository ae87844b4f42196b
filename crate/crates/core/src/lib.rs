//! Quantum state tomography of product-Pauli data.
//!
//! Linear-inversion and maximum-likelihood estimators for `n`-qubit states
//! measured with the `3^n`-setting product-Pauli POM, a multinomial data
//! simulator, and a harness that compares the two estimators' target-fidelity
//! predictions through their bias, variance and mean squared error.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod pauli;
pub mod qubit;
pub mod sim;
pub mod states;

pub use error::{Result, TomoError};
pub use linalg::{ComplexMatrix, EigenSystem};
