//! Geodesically monotone Riemannian games and curvature-independent
//! first-order solvers.

pub mod error;
pub mod games;
pub mod linalg;
pub mod manifold;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
