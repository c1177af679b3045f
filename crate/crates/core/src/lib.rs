//! One-dimensional model eigenvalues for spectral gap lower bounds.

pub mod auxiliary;
pub mod bounds;
pub mod eigen;
pub mod error;
pub mod matching;
pub mod perturbation;
pub mod model;
pub mod ode;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use model::{Branch, Domain, ModelParams, ModelSolution, SolveOptions};
