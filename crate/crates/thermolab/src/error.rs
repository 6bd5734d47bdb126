//! Error type shared by all modules.

use thiserror::Error;

/// Failure modes of the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Operand dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A state violates positivity, normalization or hermiticity.
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// An operator expected to be Hermitian is not.
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    /// Parameters outside the documented domain.
    #[error("configuration error: {0}")]
    Config(String),
    /// Energy window without eigenvalues.
    #[error("energy window contains no eigenvalue")]
    EmptyWindow,
    /// Too few levels for spacing statistics.
    #[error("insufficient spectrum: {have} bulk levels, need {need}")]
    InsufficientSpectrum { have: usize, need: usize },
    /// Subspaces violating the dimension condition of the unbiased construction.
    #[error("infeasible subspaces {0:?}")]
    InfeasibleSubspace(Vec<usize>),
    /// The unbiased basis could not be driven below tolerance.
    #[error("subspace {subspace}: unbiasedness residual {residual:e} above tolerance")]
    Unattained { subspace: usize, residual: f64 },
    /// A series without enough local minima for a fit.
    #[error("insufficient structure: {0} local minima, need 4")]
    InsufficientStructure(usize),
    /// The requested computation exceeds the memory budget.
    #[error("resource limit: {0}")]
    Resource(String),
}

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;
