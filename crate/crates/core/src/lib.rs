//! Classical shadows versus direct measurement: estimators, cost models and
//! the runtime frontier between them.

pub mod cost;
pub mod ensemble;
pub mod error;
pub mod footage;
pub mod frontier;
pub mod pauli;
pub mod rng;
pub mod shadow;
pub mod sparse;
pub mod state;

pub use error::{Error, Result};
pub use rng::RngSeed;

/// Dense complex matrix used for small-system oracles.
pub type DenseMatrix = nalgebra::DMatrix<num_complex::Complex64>;
