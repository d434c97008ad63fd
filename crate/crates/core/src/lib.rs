//! Numerical core: exact dense statevector simulation, the variational
//! circuit template with shift-rule gradients, quantum circuit cutting with
//! exact reconstruction, and trainable hybrid/classical classifiers.
//!
//! Data-parallel inner loops (shifted circuit evaluations, cut-combination
//! execution, per-sample batch gradients) run on rayon when the default
//! `parallel` feature is enabled and fall back to sequential loops otherwise;
//! both routes reduce in stable order and produce bit-identical results.

pub mod ansatz;
pub mod checkpoint;
pub mod cutting;
pub mod error;
pub mod exec;
pub mod model;
pub mod statevector;
pub mod training;

pub use error::{CoreError, Result};
pub use exec::ExecPolicy;
