use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: `{name}` is already declared")]
    Redeclaration { pos: Pos, name: String },
    #[error("{pos}: unknown symbol `{name}`")]
    UnknownSymbol { pos: Pos, name: String },
    #[error("{pos}: sort mismatch: {msg}")]
    SortMismatch { pos: Pos, msg: String },
    #[error("{pos}: unbound variable `{name}`")]
    UnboundVariable { pos: Pos, name: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

impl ParseError {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Redeclaration { pos, .. }
            | ParseError::UnknownSymbol { pos, .. }
            | ParseError::SortMismatch { pos, .. }
            | ParseError::UnboundVariable { pos, .. }
            | ParseError::Invalid { pos, .. } => Some(*pos),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax",
            ParseError::Redeclaration { .. } => "redeclaration",
            ParseError::UnknownSymbol { .. } => "unknown_symbol",
            ParseError::SortMismatch { .. } => "sort_mismatch",
            ParseError::UnboundVariable { .. } => "unbound_variable",
            ParseError::Invalid { .. } => "invalid",
        }
    }
}
