use thiserror::Error;

/// Errors raised by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("Jacobi diagonalization did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("argument out of domain: {0}")]
    DomainError(String),

    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid matrix polynomial: {0}")]
    InvalidPolynomial(String),

    #[error(
        "ill-posed moment pair ({i}, {j}): eigenvalue sum {denominator:.3e} vanishes but coupling is {coupling:.3e}"
    )]
    SingularMomentPair {
        i: usize,
        j: usize,
        denominator: f64,
        coupling: f64,
    },

    #[error("rotation angle is degenerate at x = {0}; use the closed form instead")]
    DegenerateRotation(f64),

    #[error("invalid POM: {0}")]
    InvalidPom(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid mixture strategy: {0}")]
    InvalidStrategy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
