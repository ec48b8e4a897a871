use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    /// Grid geometry or step size violates an invariant.
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    /// Wave-function data violates an invariant (NaN samples, size mismatch).
    #[error("invalid grid state: {0}")]
    InvalidState(String),
    /// Non-finite samples appeared during propagation.
    #[error("wave function diverged during propagation at t = {t}")]
    Collapsed { t: f64 },
    /// Malformed binary dump or serialized state.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Variational(#[from] tgpe_variational::VariationalError),
    #[error(transparent)]
    Core(#[from] tgpe_core::CoreError),
}

pub type Result<T> = std::result::Result<T, GridError>;
