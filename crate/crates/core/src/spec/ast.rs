use std::fmt;

use crate::error::{Error, Result};
use crate::num::Num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, lhs: Num, rhs: Num) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    /// `>` or `≥`.
    pub fn is_lower_bound(self) -> bool {
        matches!(self, CmpOp::Gt | CmpOp::Ge)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// `t_i ∼ α`: the next time difference `x_i(k+1) - x_i(k)` compared with `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeDiffProposition {
    /// 0-based component index.
    pub index: usize,
    pub op: CmpOp,
    pub alpha: Num,
}

impl TimeDiffProposition {
    pub fn new(index: usize, op: CmpOp, alpha: Num) -> Self {
        TimeDiffProposition { index, op, alpha }
    }
}

impl fmt::Display for TimeDiffProposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{} {} {}", self.index + 1, self.op.symbol(), self.alpha)
    }
}

/// LTL over atoms of type `A`, in the core connectives. Disjunction,
/// implication, eventually and always are built from these when parsed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ltl<A> {
    True,
    Atom(A),
    Not(Box<Ltl<A>>),
    And(Box<Ltl<A>>, Box<Ltl<A>>),
    Next(Box<Ltl<A>>),
    Until(Box<Ltl<A>>, Box<Ltl<A>>),
}

pub type LtlFormula = Ltl<TimeDiffProposition>;

impl<A> Ltl<A> {
    pub fn falsum() -> Self {
        Ltl::Not(Box::new(Ltl::True))
    }

    pub fn constant(b: bool) -> Self {
        if b { Ltl::True } else { Ltl::falsum() }
    }

    pub fn negate(self) -> Self {
        Ltl::Not(Box::new(self))
    }

    pub fn and(self, rhs: Self) -> Self {
        Ltl::And(Box::new(self), Box::new(rhs))
    }

    /// `a ∨ b = ¬(¬a ∧ ¬b)`
    pub fn or(self, rhs: Self) -> Self {
        self.negate().and(rhs.negate()).negate()
    }

    /// `a → b = ¬(a ∧ ¬b)`
    pub fn implies(self, rhs: Self) -> Self {
        self.and(rhs.negate()).negate()
    }

    pub fn next(self) -> Self {
        Ltl::Next(Box::new(self))
    }

    pub fn until(self, rhs: Self) -> Self {
        Ltl::Until(Box::new(self), Box::new(rhs))
    }

    /// `◇φ = true U φ`
    pub fn eventually(self) -> Self {
        Ltl::True.until(self)
    }

    /// `□φ = ¬◇¬φ`
    pub fn always(self) -> Self {
        self.negate().eventually().negate()
    }

    /// `Some(b)` when the formula is the literal `true` or `¬true`.
    pub fn as_constant(&self) -> Option<bool> {
        match self {
            Ltl::True => Some(true),
            Ltl::Not(inner) if matches!(**inner, Ltl::True) => Some(false),
            _ => None,
        }
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a A>) {
        match self {
            Ltl::True => {}
            Ltl::Atom(a) => out.push(a),
            Ltl::Not(x) | Ltl::Next(x) => x.collect_atoms(out),
            Ltl::And(a, b) | Ltl::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn try_map_atoms<B, E>(&self, f: &mut impl FnMut(&A) -> Result<Ltl<B>, E>) -> Result<Ltl<B>, E> {
        Ok(match self {
            Ltl::True => Ltl::True,
            Ltl::Atom(a) => f(a)?,
            Ltl::Not(x) => Ltl::Not(Box::new(x.try_map_atoms(f)?)),
            Ltl::Next(x) => Ltl::Next(Box::new(x.try_map_atoms(f)?)),
            Ltl::And(a, b) => Ltl::And(Box::new(a.try_map_atoms(f)?), Box::new(b.try_map_atoms(f)?)),
            Ltl::Until(a, b) => Ltl::Until(Box::new(a.try_map_atoms(f)?), Box::new(b.try_map_atoms(f)?)),
        })
    }

    /// Replaces atoms by arbitrary subformulas.
    pub fn map_atoms<B>(&self, mut f: impl FnMut(&A) -> Ltl<B>) -> Ltl<B> {
        self.try_map_atoms::<B, std::convert::Infallible>(&mut |a| Ok(f(a))).unwrap_or_else(|e| match e {})
    }

    /// If the formula is `◇□ a` for an atom `a` (in desugared form), that atom.
    pub fn as_eventually_always_atom(&self) -> Option<&A> {
        // true U ¬(true U ¬a)
        let Ltl::Until(lhs, rhs) = self else { return None };
        if !matches!(**lhs, Ltl::True) {
            return None;
        }
        let Ltl::Not(inner) = &**rhs else { return None };
        let Ltl::Until(lhs2, rhs2) = &**inner else { return None };
        if !matches!(**lhs2, Ltl::True) {
            return None;
        }
        let Ltl::Not(atom) = &**rhs2 else { return None };
        match &**atom {
            Ltl::Atom(a) => Some(a),
            _ => None,
        }
    }
}

impl LtlFormula {
    /// Checks every atom against the system dimension.
    pub fn check_indices(&self, n: usize) -> Result<()> {
        for a in self.atoms() {
            if a.index >= n {
                return Err(Error::IndexOutOfRange { index: a.index + 1, n });
            }
        }
        Ok(())
    }

    /// Distinct atoms in first-occurrence order.
    pub fn distinct_atoms(&self) -> Vec<TimeDiffProposition> {
        let mut out: Vec<TimeDiffProposition> = Vec::new();
        for a in self.atoms() {
            if !out.contains(a) {
                out.push(*a);
            }
        }
        out
    }
}

impl<A: fmt::Display> fmt::Display for Ltl<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => f.write_str("true"),
            Ltl::Atom(a) => write!(f, "({a})"),
            Ltl::Not(inner) => match &**inner {
                Ltl::True => f.write_str("false"),
                Ltl::Until(l, r) if matches!(**l, Ltl::True) => match &**r {
                    Ltl::Not(body) => write!(f, "G {body}"),
                    _ => write!(f, "!{inner}"),
                },
                Ltl::And(l, r) => match (&**l, &**r) {
                    (Ltl::Not(a), Ltl::Not(b)) => write!(f, "({a} | {b})"),
                    (a, Ltl::Not(b)) => write!(f, "({a} -> {b})"),
                    _ => write!(f, "!{inner}"),
                },
                _ => write!(f, "!{inner}"),
            },
            Ltl::And(a, b) => write!(f, "({a} & {b})"),
            Ltl::Next(a) => write!(f, "X {a}"),
            Ltl::Until(a, b) if matches!(**a, Ltl::True) => write!(f, "F {b}"),
            Ltl::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}
