use std::fmt;

use crate::abstraction::PredicateSet;
use crate::error::{Error, Result};
use crate::maxplus::MaxPlusMatrix;

use super::ast::{Ltl, LtlFormula};
use super::direct::constant_truth;

/// Boolean combination of predicate ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropExpr {
    Const(bool),
    Pred(usize),
    Not(Box<PropExpr>),
    And(Vec<PropExpr>),
    Or(Vec<PropExpr>),
}

impl PropExpr {
    pub fn eval(&self, valuation: &[bool]) -> bool {
        match self {
            PropExpr::Const(c) => *c,
            PropExpr::Pred(id) => valuation[*id],
            PropExpr::Not(x) => !x.eval(valuation),
            PropExpr::And(xs) => xs.iter().all(|x| x.eval(valuation)),
            PropExpr::Or(xs) => xs.iter().any(|x| x.eval(valuation)),
        }
    }
}

impl fmt::Display for PropExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[PropExpr], sep: &str, empty: &str| {
            if xs.is_empty() {
                return f.write_str(empty);
            }
            let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(sep))
        };
        match self {
            PropExpr::Const(c) => write!(f, "{c}"),
            PropExpr::Pred(id) => write!(f, "p{id}"),
            PropExpr::Not(x) => write!(f, "!{x}"),
            PropExpr::And(xs) => join(f, xs, " & ", "true"),
            PropExpr::Or(xs) => join(f, xs, " | ", "false"),
        }
    }
}

/// LTL over predicate combinations, evaluated on abstract states.
pub type PredicateFormula = Ltl<PropExpr>;

/// Rewrites each atom over the predicates that decide it. Every atom must
/// have been registered in `set`.
pub fn translate(a: &MaxPlusMatrix, formula: &LtlFormula, set: &PredicateSet) -> Result<PredicateFormula> {
    formula.try_map_atoms(&mut |p| {
        if let Some(c) = constant_truth(a, p) {
            return Ok(Ltl::Atom(PropExpr::Const(c)));
        }
        let ids = set
            .atom_predicates(p)
            .ok_or_else(|| Error::Internal(format!("atom `{p}` has no predicates registered")))?;
        let terms: Vec<PropExpr> = ids.iter().map(|&id| PropExpr::Pred(id)).collect();
        Ok(Ltl::Atom(if p.op.is_lower_bound() { PropExpr::Or(terms) } else { PropExpr::And(terms) }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse;

    #[test]
    fn railway_translation() {
        let a = MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap();
        let f = parse("F G (t1 <= 5)").unwrap();
        let set = PredicateSet::for_atoms(&a, &f.distinct_atoms()).unwrap();
        let g = translate(&a, &f, &set).unwrap();
        assert_eq!(g.to_string(), "F G ((p1))");
        let e = g.as_eventually_always_atom().unwrap();
        assert!(e.eval(&[false, true]));
        assert!(!e.eval(&[true, false]));
    }

    #[test]
    fn unregistered_atom_is_an_error() {
        let a = MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap();
        let set = PredicateSet::from_matrix(&a).unwrap();
        assert!(translate(&a, &parse("t1 <= 5").unwrap(), &set).is_err());
    }
}
