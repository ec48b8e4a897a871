//! Error type for the variational solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VariationalError {
    #[error("invalid packet: {0}")]
    InvalidPacket(String),
    #[error("non-normalizable packet pair ({i}, {j}): combined width matrix not positive definite")]
    NonNormalizablePair { i: usize, j: usize },
    #[error("dipolar quadrature did not converge for pair ({i}, {j}): error estimate {err:.3e}")]
    QuadratureFailure { i: usize, j: usize, err: f64 },
    #[error("overlap matrix singular beyond the pseudo-inverse floor (ill-conditioned ansatz, near-coalescing packets)")]
    IllConditioned,
    #[error("adaptive step size underflow at t = {t:.6e}; flow too stiff to integrate")]
    StepSizeUnderflow { t: f64 },
    #[error("state serialization: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
