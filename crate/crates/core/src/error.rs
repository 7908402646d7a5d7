use thiserror::Error;

/// Errors surfaced by the library.
///
/// Configuration problems (bad parameters, unsupported backends) are kept
/// separate from runtime precision exhaustion so that the CLI can map them
/// to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("precision exhausted: {0}")]
    Precision(String),

    #[error("non-unit element cannot be inverted (valuation {0})")]
    NonUnit(usize),

    #[error("backend or precision mismatch: {0}")]
    Mismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("construction validation failed: {0}")]
    Construction(String),

    #[error("truncation unstable: kernel dimension changed from {0} to {1} when slack increased")]
    SlackInstability(usize, usize),

    #[error("radius overflow: needed {needed}, ball radius {available}")]
    RadiusOverflow { needed: usize, available: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
