use thiserror::Error;

/// Errors produced by the histopolation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An exponent or density parameter outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Degenerate geometry (zero-volume tetrahedron).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Invalid argument such as a mesh parameter below 2.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The seed handed to Gram-Schmidt already lies in the affine span.
    #[error("degenerate seed: {0}")]
    DegenerateSeed(String),

    /// The functional matrix of a strategy is singular.
    #[error("unisolvence failure for {strategy}: {reason}")]
    Unisolvence { strategy: String, reason: String },

    /// Target function returned a non-finite value.
    #[error("evaluation of {function} failed on cell {cell}")]
    Evaluation { function: String, cell: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
