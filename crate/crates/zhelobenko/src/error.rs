//! Error type shared by the whole engine.

use thiserror::Error;

/// Everything that can go wrong while building algebras or running operators.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid Cartan matrix: {0}")]
    InvalidCartan(String),

    #[error("not a reduced word for the expected element: {0}")]
    NonReducedWord(String),

    #[error("index out of range: {0}")]
    IndexRange(String),

    #[error("not a normal ordering: {0}")]
    NotNormalOrdering(String),

    #[error("element has support outside the Borel subalgebra: {0}")]
    NotInBorel(String),

    #[error("Cartan part is not regular: {0}(h) = 0")]
    NonRegular(String),

    #[error("element is not nilpotent: {0}")]
    NotNilpotent(String),

    #[error("pole at evaluation point: factor {0} vanishes")]
    Pole(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("inadmissible denominator factor: {0}")]
    InadmissibleFactor(String),

    #[error(
        "series does not terminate on this representative (root {root}, depth {depth} exceeded)"
    )]
    SeriesDiverges { root: String, depth: usize },

    #[error("termination-domain violation: {0}")]
    TerminationDomain(String),

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("unknown root: {0}")]
    UnknownRoot(String),

    #[error("parse error at byte {at}: {msg}")]
    Parse { at: usize, msg: String },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
