//! Bayes-optimal estimation of the depolarizing-channel parameter.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices and a Jacobi Hermitian eigensolver.
//! - [`poly`]: exact rational polynomials for moment integrals.
//! - [`probe`] and [`channel`]: probe states and the output families `Ψ(θ)`.
//! - [`bayes`]: risk moments, the minimizing operator, optimal POM, cost,
//!   and the optimality verifier.
//! - [`analytic`]: closed-form results for two qubits and the exact
//!   multi-pair cost series.
//! - [`mc`]: Monte-Carlo simulation and a quadrature oracle.

pub mod analytic;
pub mod bayes;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod poly;
pub mod probe;

pub use error::{Error, Result};
