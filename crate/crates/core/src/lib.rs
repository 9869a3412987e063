//! Rank-one non-Hermitian perturbations of tridiagonal β-ensembles.

pub mod density;
pub mod dist;
pub mod ensembles;
pub mod error;
pub mod jacobi;
pub mod perturb;
pub mod poly;
pub mod rng;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
