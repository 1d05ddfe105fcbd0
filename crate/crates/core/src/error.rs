use thiserror::Error;

/// Errors raised by the geometry, estimation and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({re}, {im}) is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("point ({0}, {1}) is not strictly inside the domain")]
    OutsideDomain(f64, f64),

    #[error("intervals do not cover the circle (gap at angle {gap})")]
    NotCovering { gap: f64 },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("chain winding number {0} < 1")]
    Winding(i64),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("cover failure: angle {escaping_angle} escapes the interval family (u = {u})")]
    CoverFailure { u: f64, escaping_angle: f64 },

    #[error("no admissible cone parameter for d = {d}: l({u_min}) = {l_min} <= 1.1 d")]
    NoConeParameter { d: f64, u_min: f64, l_min: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
