use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid letter {letter:?}: letters are digits 1..=9")]
    InvalidLetter { letter: char },
    #[error("letter {letter} outside alphabet 1..={d}")]
    LetterOutOfAlphabet { letter: u8, d: u8 },
    #[error("alphabet size {0} outside 1..=9")]
    AlphabetSize(usize),
    #[error("invalid operator word {0:?}: expected letters c and s")]
    InvalidOpWord(String),
    #[error("operator of grade {grade} cannot act on a word of length {len}")]
    GradeMismatch { grade: usize, len: usize },
    #[error("operation requires a non-empty word")]
    EmptyWord,
    #[error("invalid coefficient set: {0}")]
    CoefficientSet(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("coarse interval [{start}, {end}) is not aligned to a mesh of {fine_steps} steps")]
    Misaligned {
        start: usize,
        end: usize,
        fine_steps: usize,
    },
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid rational {0:?}")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
