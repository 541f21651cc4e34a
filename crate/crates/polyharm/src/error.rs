//! Error taxonomy shared across the crate.

/// Crate-wide error type.
///
/// The variants map onto the CLI exit codes: argument, validation, lookup,
/// parse and I/O problems are usage errors (exit 2), while domain, numerical,
/// sampling and capability problems are runtime errors (exit 3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller passed arguments violating a precondition.
    #[error("argument error: {0}")]
    Argument(String),
    /// Input data failed a structural validation check.
    #[error("validation error: {0}")]
    Validation(String),
    /// A name was not found in a registry.
    #[error("lookup error: {0}")]
    Lookup(String),
    /// An evaluation point sits on (or too close to) a branch cut or pole.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure failed to reach its accuracy target.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// The sampler could not produce enough admissible points.
    #[error("sampling error: {0}")]
    Sampling(String),
    /// The requested computation is outside the implemented closed forms.
    #[error("capability error: {0}")]
    Capability(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether this error is a usage problem (bad input) rather than a
    /// runtime numerical/domain failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Argument(_)
                | Error::Validation(_)
                | Error::Lookup(_)
                | Error::Parse(_)
                | Error::Io(_)
        )
    }
}
