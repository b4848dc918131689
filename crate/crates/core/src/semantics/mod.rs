//! Finite Kripke models and truth sets.

mod axioms;
mod eval;
mod model;
mod search;

pub use axioms::axiom_instances;
pub use eval::{approximant, eval, eval_body, eval_mask, eval_nabla_via_relation, holds, valid_in};
pub use model::KripkeModel;
pub use search::{brute_force_sat, for_each_model, frames, MAX_SEARCH_STATES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("invalid model: {0}")]
    Model(String),
    #[error("brute-force search is limited to {max} states, got {0}", max = MAX_SEARCH_STATES)]
    TooLarge(usize),
}
