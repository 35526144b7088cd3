use thiserror::Error;

/// Errors raised while reading or validating models, specifications and
/// benchmark configurations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("undeclared {kind} `{name}`")]
    Undeclared { kind: &'static str, name: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("nondeterministic transition: state `{state}` has several successors under `{action}`")]
    Nondeterministic { state: String, action: String },
    #[error("owner mismatch: state `{state}` uses action `{action}` of the other player")]
    OwnerMismatch { state: String, action: String },
    #[error("state `{0}` has no enabled action")]
    NoEnabledAction(String),
    #[error("no initial state declared")]
    MissingInitial,
    #[error("automaton state `{state}`: {message}")]
    Automaton { state: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ModelError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ModelError::Syntax { line, column, message: message.into() }
    }
}
