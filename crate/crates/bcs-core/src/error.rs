use thiserror::Error;

/// Errors surfaced by polynomial arithmetic, parsing, and orderings.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("variable index {index} outside 1..={max}")]
    VarOutOfRange { index: usize, max: usize },

    #[error("assignment covers {have} variables but the polynomial mentions x{need}")]
    AssignmentTooShort { have: usize, need: usize },

    #[error("constant polynomial has no leading variable")]
    ConstantLeadingSplit,

    #[error("zero polynomial has no leading monomial")]
    LmOfZero,

    #[error("ordering has length {have} but the system has {want} variables")]
    OrderLength { have: usize, want: usize },

    #[error("not a permutation of 1..={n}: {reason}")]
    BadPermutation { n: usize, reason: String },

    #[error("swap positions ({i}, {j}) invalid for n = {n}; need 1 <= i < j <= n")]
    BadSwap { i: usize, j: usize, n: usize },
}

impl CoreError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        CoreError::Parse { line, msg: msg.into() }
    }
}
