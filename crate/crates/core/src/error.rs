use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("size {dim} exceeds cap {cap}")]
    Size { dim: usize, cap: usize },
    #[error("root bracketing failed: {0}")]
    Bracketing(String),
    #[error("eigensolver did not converge: {0}")]
    Convergence(String),
    #[error("sector key is not conserved: {0}")]
    NotConserved(String),
    #[error("a zero-energy block exists, the instance is accepted with certainty")]
    Case1,
    #[error("not a no-instance: {0}")]
    NotNoInstance(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("integrator tolerance not met: {0}")]
    IntegratorTolerance(String),
    #[error("canonical path invalid: {0}")]
    PathInvalid(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("analytic and numeric results disagree: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Largest state-space dimension that will be built explicitly.
/// Defaults to 2^20, overridden by `CLOCKFORGE_MAX_DIM`.
pub fn max_dim() -> usize {
    std::env::var("CLOCKFORGE_MAX_DIM")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(1 << 20)
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    let cap = max_dim();
    if dim > cap {
        Err(Error::Size { dim, cap })
    } else {
        Ok(())
    }
}
