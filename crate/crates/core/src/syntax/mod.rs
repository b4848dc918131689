//! Formulas, concrete syntax, and analysis of fixpoint connectives.

pub mod connective;
pub mod disjunctive;
pub mod formula;
pub mod guardify;
pub mod parser;

pub use connective::{classify_disjunctive, is_guarded, ConnectiveDef, ConnectiveTable, DisjClass, FixpointConnective};
pub use disjunctive::{DisjTree, NodeKind};
pub use formula::{param_var, Dir, Formula, RECURSION_VAR};
pub use guardify::{guardify, translate_guarded, GuardificationResult};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("syntax error at offset {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("unknown connective `#{name}` at offset {pos}")]
    UnknownConnective { name: String, pos: usize },
    #[error("connective `#{name}` takes {expected} argument(s), got {found} (offset {pos})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        pos: usize,
    },
    #[error("invalid connective `{name}`: {reason}")]
    BadConnective { name: String, reason: String },
    #[error("invalid connective definitions: {0}")]
    Defs(String),
    #[error("connective `{0}` is not disjunctive")]
    NotDisjunctive(String),
    #[error("no guarded translation for connective `{0}`")]
    MissingTranslation(String),
}
