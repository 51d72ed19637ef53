//! Bounded model checking of max-plus-linear systems against LTL
//! properties over time differences, by predicate abstraction and
//! counterexample-guided refinement.

pub mod abstraction;
pub mod bmc;
pub mod dbm;
pub mod error;
pub mod harness;
pub mod maxplus;
pub mod num;
pub mod par;
pub mod spec;

pub use abstraction::{AbstractTransitionSystem, PredicateSet};
pub use dbm::{AffineDynamics, Bound, Constraint, Dbm};
pub use error::{Error, Result};
pub use maxplus::{MaxPlusMatrix, MpScalar, SpectralProfile};
pub use num::Num;
pub use par::Exec;
pub use spec::{LtlFormula, parse};
