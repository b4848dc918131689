//! Flat modal fixpoint logic with converse: syntax, closure, Kripke
//! semantics, networks and the defect-repair construction of models.

pub mod acceptance;
pub mod bitset;
pub mod cli;
pub mod closure;
pub mod construct;
pub mod network;
pub mod oracle;
pub mod semantics;
pub mod syntax;
