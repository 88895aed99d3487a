use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside an operation's domain (bad sizes, out-of-range sites, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure (sector n={n_magnons}, theta={theta}): {message}")]
    Numeric {
        n_magnons: usize,
        theta: f64,
        message: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
