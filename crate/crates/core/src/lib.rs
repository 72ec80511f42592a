//! First eigenpairs of the p-Bilaplacian on planar and one-dimensional grid
//! domains, their continuation towards p = ∞, closed-form ball oracles and
//! Faber-Krahn experiments.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod eigensolver;
pub mod io;
pub mod oracles;
pub mod harness;
pub mod cli;

pub use error::{Error, Result};
