//! Predicate abstraction of a max-plus-linear system into a finite
//! transition system, and its refinement.

mod predicate;
mod states;
mod system;

pub use predicate::{Predicate, PredicateSet, RowPair, predicates_from_matrix, predicates_from_timediff};
pub use states::{affine_dynamics_for_state, generate_abstract_states};
pub use system::{
    AbstractState, AbstractTransitionSystem, AbstractionJson, StateJson, generate_transitions, initial_states,
};
