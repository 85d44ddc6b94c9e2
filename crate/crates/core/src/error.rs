use thiserror::Error;

/// Errors raised by the spanner library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spans {0} and {1} are not adjacent")]
    NonAdjacentSpans(String, String),

    #[error("mappings are not compatible on variable `{0}`")]
    IncompatibleMappings(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("symbol {0:?} is not in the declared alphabet")]
    UndeclaredSymbol(char),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("automaton is not functional: {0}")]
    NotFunctional(String),

    #[error("classification too large: {vars} variables exceeds the cap of {cap}")]
    ClassificationTooLarge { vars: usize, cap: usize },

    #[error("variable sets differ: {0}")]
    VariableMismatch(String),

    #[error("profile unsatisfiable after {0} attempts")]
    ProfileUnsatisfiable(usize),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input (syntax, I/O, file format)
    /// rather than by the semantics of a well-formed input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::InvalidAutomaton(_) | Error::Io(_) | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
