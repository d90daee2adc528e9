use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index k = {k} out of range for N = {n}")]
    Domain { n: u32, k: u32 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state is not normalized (|alpha|^2 + |beta|^2 = {0})")]
    NotNormalized(f64),

    #[error("mode map is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("postselection accepts total probability {0:e}; nothing to average")]
    EmptyPostselection(f64),

    #[error("N = {n} exceeds the exact-simulation limit of {limit}")]
    Resource { n: u32, limit: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
