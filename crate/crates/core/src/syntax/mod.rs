//! The term language: sorts, terms, numerals, and the `.hl` declaration syntax.

mod error;
mod format;
mod lexer;
mod numeral;
pub(crate) mod parser;
mod sort;
mod term;

pub use error::{ParseError, Pos};
pub use format::{format_decl, format_env, format_term};
pub use lexer::{lex, Tok, Token};
pub use numeral::Numeral;
pub use parser::{parse_atom, parse_decls, parse_decprop, parse_into, parse_term, TermCtx};
pub use sort::{Sort, SortSubst};
pub use term::{sym, Path, RelOp, Subst, Term};
