use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cut locus: points are antipodal or nearly so")]
    CutLocus,
    #[error("CFL violation: dt = {dt} exceeds h^2/2 = {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("gradient check failed for {what}: max deviation {err:e}")]
    GradientCheck { what: String, err: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
