//! Gaussian bipartite dynamics: reduced von Neumann entropy production
//! under quadratic Hamiltonians, compared against the upper quantum
//! Lyapunov exponent, with a damped-bath baseline whose entropy saturates.
//!
//! Conventions used throughout: ħ = 1, phase-space ordering
//! `(x1, p1, x2, p2, ...)`, ladder map `a = (x + i p)/sqrt(2)`.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod qbme;
pub mod scenario;

pub use error::{Error, Result};
