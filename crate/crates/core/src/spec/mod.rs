//! Property language: LTL over time-difference propositions.

mod ast;
mod direct;
mod eval;
mod parser;
mod semantics;
mod translate;

pub use ast::{CmpOp, Ltl, LtlFormula, TimeDiffProposition};
pub use direct::{DirectReason, DirectReport, DirectVerdict, constant_truth, direct_check, simplify};
pub use eval::{evaluate_timediff, time_differences};
pub use parser::parse;
pub use semantics::{Nnf, PathShape, evaluate};
pub use translate::{PredicateFormula, PropExpr, translate};
