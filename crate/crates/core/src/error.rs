use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid algebra table: {0}")]
    InvalidTable(String),

    #[error("multiplication table is not associative on basis triple ({0}, {1}, {2})")]
    NonAssociative(usize, usize, usize),

    #[error("unit law fails on basis element {0}")]
    NoUnit(usize),

    #[error("operands belong to different algebras ({0} vs {1})")]
    AlgebraMismatch(String, String),

    #[error("element is not invertible")]
    Singular,

    #[error("linear map is singular")]
    SingularMap,

    #[error("matrix of maps is singular")]
    SingularMapMatrix,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown symbol `{name}` at position {pos}")]
    UnknownSymbol { pos: usize, name: String },

    #[error("variable index {index} out of range 1..={max} at position {pos}")]
    IndexOutOfRange {
        pos: usize,
        index: usize,
        max: usize,
    },

    #[error("structure constants vary across points: spread {spread:e} > {tol:e}")]
    SpreadTooLarge { spread: f64, tol: f64 },

    #[error("group data violates {check}: residual {residual:e}")]
    SpecInvariant { check: String, residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Error::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    /// True for errors raised while evaluating at a point (as opposed to parsing).
    pub fn is_evaluation(&self) -> bool {
        matches!(
            self,
            Error::Singular
                | Error::SingularMap
                | Error::SingularMapMatrix
                | Error::AlgebraMismatch(..)
        )
    }

    pub fn is_parse(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::UnknownSymbol { .. } | Error::IndexOutOfRange { .. }
        )
    }
}
