//! Stochastic conditional gradient methods for composite problems with
//! affine constraints, `min_{x ∈ X} E f(x, ω) + g(Ax)`.
//!
//! The solver never projects onto `X`; it only calls a linear minimization
//! oracle over `X`. The nonsmooth term is handled by a vanishing smoothing
//! (or quadratic penalty for indicators) and the gradient by an averaged
//! stochastic estimator.

pub mod domains;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod nonsmooth;
pub mod problems;
pub mod reference;
pub mod solvers;
pub mod stochastic;

pub use error::{Error, Result};
