//! Error type for parameter validation and unit conversion.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("non-physical unit system: {0}")]
    InvalidUnits(String),
}

impl CoreError {
    pub(crate) fn invalid_param(msg: impl Into<String>) -> Self {
        Self::InvalidParam(msg.into())
    }

    pub(crate) fn invalid_units(msg: impl Into<String>) -> Self {
        Self::InvalidUnits(msg.into())
    }
}
