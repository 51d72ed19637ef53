//! Checks that need no abstraction: atoms that are constant on every state,
//! and the eventually-always case settled by the eigenvalue.

use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::Result;
use crate::maxplus::MaxPlusMatrix;

use super::ast::{Ltl, LtlFormula, TimeDiffProposition};

/// Whether `prop` has the same truth value in every state.
///
/// Since `t_i ≥ A(i,i)` always holds, some atoms are decided by the diagonal
/// alone. A row whose only finite entry is the diagonal makes `t_i`
/// identically `A(i,i)`.
pub fn constant_truth(a: &MaxPlusMatrix, prop: &TimeDiffProposition) -> Option<bool> {
    use super::CmpOp::*;
    let i = prop.index;
    let beta = a.get(i, i).finite()?;
    let alpha = prop.alpha;
    let decided = match prop.op {
        Ge if beta >= alpha => Some(true),
        Gt if beta > alpha => Some(true),
        Le if alpha < beta => Some(false),
        Lt if alpha <= beta => Some(false),
        _ => None,
    };
    if decided.is_some() {
        return decided;
    }
    let only_diagonal = (0..a.n()).all(|j| j == i || !a.get(i, j).is_finite());
    only_diagonal.then(|| prop.op.holds(beta, alpha))
}

/// Constant folding that is sound on infinite paths.
pub fn simplify<A: Clone>(f: &Ltl<A>) -> Ltl<A> {
    match f {
        Ltl::True | Ltl::Atom(_) => f.clone(),
        Ltl::Not(x) => {
            let x = simplify(x);
            match x.as_constant() {
                Some(c) => Ltl::constant(!c),
                None => x.negate(),
            }
        }
        Ltl::And(x, y) => {
            let (x, y) = (simplify(x), simplify(y));
            match (x.as_constant(), y.as_constant()) {
                (Some(false), _) | (_, Some(false)) => Ltl::falsum(),
                (Some(true), _) => y,
                (_, Some(true)) => x,
                _ => x.and(y),
            }
        }
        Ltl::Next(x) => {
            let x = simplify(x);
            match x.as_constant() {
                Some(c) => Ltl::constant(c),
                None => x.next(),
            }
        }
        Ltl::Until(x, y) => {
            let (x, y) = (simplify(x), simplify(y));
            match (x.as_constant(), y.as_constant()) {
                (_, Some(c)) => Ltl::constant(c),
                (Some(false), None) => y,
                _ => x.until(y),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectVerdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectReason {
    Tautology,
    Contradiction,
    /// Both kinds of constant atoms took part.
    Constants,
    Eigenvalue,
}

impl fmt::Display for DirectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectReason::Tautology => "direct: tautology",
            DirectReason::Contradiction => "direct: contradiction",
            DirectReason::Constants => "direct: constant atoms",
            DirectReason::Eigenvalue => "direct: eigenvalue",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DirectReport {
    pub verdict: DirectVerdict,
    pub reason: Option<DirectReason>,
    /// The formula after substituting and folding constant atoms.
    pub residual: LtlFormula,
    pub constants: Vec<(TimeDiffProposition, bool)>,
    /// Maximum cycle mean, when it was needed.
    pub lambda: Option<Rational64>,
}

/// Tries to decide `formula` without building an abstraction.
pub fn direct_check(a: &MaxPlusMatrix, formula: &LtlFormula) -> Result<DirectReport> {
    formula.check_indices(a.n())?;
    let constants: Vec<(TimeDiffProposition, bool)> =
        formula.distinct_atoms().into_iter().filter_map(|p| constant_truth(a, &p).map(|c| (p, c))).collect();
    let substituted = formula.map_atoms(|p| match constants.iter().find(|(q, _)| q == p) {
        Some(&(_, c)) => Ltl::constant(c),
        None => Ltl::Atom(*p),
    });
    let residual = simplify(&substituted);
    let mut report =
        DirectReport { verdict: DirectVerdict::Inconclusive, reason: None, residual, constants, lambda: None };
    if let Some(c) = report.residual.as_constant() {
        let any_true = report.constants.iter().any(|(_, v)| *v);
        let any_false = report.constants.iter().any(|(_, v)| !*v);
        report.verdict = if c { DirectVerdict::Holds } else { DirectVerdict::Violated };
        report.reason = Some(match (any_true, any_false) {
            (true, false) => DirectReason::Tautology,
            (false, true) => DirectReason::Contradiction,
            _ => DirectReason::Constants,
        });
        return Ok(report);
    }
    if let Some(p) = formula.as_eventually_always_atom() {
        if a.is_irreducible() {
            let lambda = a.eigenvalue()?;
            report.lambda = Some(lambda);
            let alpha = Rational64::from_integer(p.alpha.ticks());
            // along every trajectory the time differences average to λ, so
            // eventually staying on the wrong side of λ is impossible
            let violated = if p.op.is_lower_bound() { lambda < alpha } else { lambda > alpha };
            if violated {
                report.verdict = DirectVerdict::Violated;
                report.reason = Some(DirectReason::Eigenvalue);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse;

    fn railway() -> MaxPlusMatrix {
        MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap()
    }

    fn check(spec: &str) -> DirectReport {
        direct_check(&railway(), &parse(spec).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_tautology() {
        let r = check("G (t1 >= 2)");
        assert_eq!(r.verdict, DirectVerdict::Holds);
        assert_eq!(r.reason, Some(DirectReason::Tautology));
        assert_eq!(r.reason.unwrap().to_string(), "direct: tautology");
    }

    #[test]
    fn diagonal_contradiction() {
        let r = check("F (t2 < 3)");
        assert_eq!(r.verdict, DirectVerdict::Violated);
        assert_eq!(r.reason, Some(DirectReason::Contradiction));
        // boundary: t2 <= 3 is satisfiable (t2 = 3 when x2 >= x1)
        assert_eq!(check("F (t2 <= 3)").verdict, DirectVerdict::Inconclusive);
    }

    #[test]
    fn eigenvalue_rules() {
        // λ = 4
        let r = check("F G (t1 >= 5)");
        assert_eq!(r.verdict, DirectVerdict::Violated);
        assert_eq!(r.reason, Some(DirectReason::Eigenvalue));
        assert_eq!(check("F G (t1 <= 3)").verdict, DirectVerdict::Violated);
        assert_eq!(check("F G (t1 <= 5)").verdict, DirectVerdict::Inconclusive);
        assert_eq!(check("F G (t1 >= 4)").verdict, DirectVerdict::Inconclusive);
        // not the exact shape
        assert_eq!(check("F G (t1 >= 5) & true").verdict, DirectVerdict::Inconclusive);
    }

    #[test]
    fn reducible_matrix_skips_eigenvalue() {
        let a = MaxPlusMatrix::from_ints(&[[Some(1), None], [Some(0), Some(2)]]).unwrap();
        let r = direct_check(&a, &parse("F G (t2 >= 9)").unwrap()).unwrap();
        assert_eq!(r.verdict, DirectVerdict::Inconclusive);
        assert!(r.lambda.is_none());
    }

    #[test]
    fn only_diagonal_row_is_constant() {
        let a = MaxPlusMatrix::from_ints(&[[Some(3), None], [Some(0), Some(2)]]).unwrap();
        let p = |s: &str| match parse(s).unwrap() {
            Ltl::Atom(p) => p,
            _ => unreachable!(),
        };
        assert_eq!(constant_truth(&a, &p("t1 <= 3")), Some(true));
        assert_eq!(constant_truth(&a, &p("t1 > 3")), Some(false));
        assert_eq!(constant_truth(&a, &p("t2 <= 3")), None);
    }

    #[test]
    fn folding_rules() {
        let f: Ltl<u8> = Ltl::Atom(0).until(Ltl::True);
        assert_eq!(simplify(&f), Ltl::True);
        let g: Ltl<u8> = Ltl::falsum().until(Ltl::Atom(1));
        assert_eq!(simplify(&g), Ltl::Atom(1));
        let h: Ltl<u8> = Ltl::True.next().and(Ltl::Atom(2));
        assert_eq!(simplify(&h), Ltl::Atom(2));
        let k: Ltl<u8> = Ltl::Atom(0).until(Ltl::falsum());
        assert_eq!(simplify(&k), Ltl::falsum());
    }
}
