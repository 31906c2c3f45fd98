use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite state at t = {t}: {detail}")]
    NonFinite { t: f64, detail: String },

    #[error("edge mass {mass:e} exceeds {limit:e} at t = {t}; the lattice window is too small")]
    EdgeMass { mass: f64, limit: f64, t: f64 },

    #[error("unitarity defect {defect:e} is not below tolerance {tol:e}")]
    Unitarity { defect: f64, tol: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("malformed operator file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
