//! Error type shared by every module of the crate.

use crate::diagram::Path;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("type error at path {0:?}: sequential composition with mismatched wire counts")]
    TypeError(Path),
    #[error("invalid path {0:?}")]
    InvalidPath(Path),
    #[error("arity mismatch: expected {expected} wires, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("node at path {path:?} is not allowed in the {dialect} dialect")]
    DialectViolation { path: Path, dialect: &'static str },
    #[error("diagram uses {wires} wires, above the configured cap of {cap}")]
    CapExceeded { wires: usize, cap: usize },
    #[error("matrix dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
    #[error("rule {rule} does not match at path {path:?}")]
    NoMatch { rule: String, path: Path },
    #[error("pattern does not match at path {0:?}")]
    PatternMismatch(Path),
    #[error("rewrite changed the interpretation (max diff {max_diff}); this is a bug in rule {rule}")]
    SemanticDrift { rule: String, max_diff: f64 },
    #[error("subterm at path {0:?} is outside the reduced gate fragment")]
    NotInFragment(Path),
    #[error("rewrite budget of {0} steps exceeded")]
    NonTermination(usize),
    #[error("rule {rule} failed validation at registration (max diff {max_diff})")]
    RegistrationFailed { rule: String, max_diff: f64 },
    #[error("parse error at line {line}, column {col}: {msg}")]
    ParseError { line: usize, col: usize, msg: String },
    #[error("trace replay diverged at step {step}: hash mismatch")]
    ReplayMismatch { step: usize },
    #[error("unknown rule {0}")]
    UnknownRule(String),
    #[error("rule instantiated without a value for parameter {0}")]
    MissingBinding(String),
}

pub type Result<T> = std::result::Result<T, Error>;
