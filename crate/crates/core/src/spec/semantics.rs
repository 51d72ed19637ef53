//! Negation normal form and bounded evaluation on finite and lasso-shaped
//! label sequences.

use super::ast::Ltl;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nnf<A> {
    True,
    False,
    /// An atom, or its negation when the flag is false.
    Lit(A, bool),
    And(Box<Nnf<A>>, Box<Nnf<A>>),
    Or(Box<Nnf<A>>, Box<Nnf<A>>),
    Next(Box<Nnf<A>>),
    Until(Box<Nnf<A>>, Box<Nnf<A>>),
    Release(Box<Nnf<A>>, Box<Nnf<A>>),
}

impl<A: Clone> Nnf<A> {
    pub fn from_ltl(f: &Ltl<A>) -> Self {
        Self::build(f, true)
    }

    fn build(f: &Ltl<A>, positive: bool) -> Self {
        let b = |x: &Ltl<A>, p: bool| Box::new(Self::build(x, p));
        match (f, positive) {
            (Ltl::True, true) => Nnf::True,
            (Ltl::True, false) => Nnf::False,
            (Ltl::Atom(a), p) => Nnf::Lit(a.clone(), p),
            (Ltl::Not(x), p) => Self::build(x, !p),
            (Ltl::And(x, y), true) => Nnf::And(b(x, true), b(y, true)),
            (Ltl::And(x, y), false) => Nnf::Or(b(x, false), b(y, false)),
            (Ltl::Next(x), p) => Nnf::Next(b(x, p)),
            (Ltl::Until(x, y), true) => Nnf::Until(b(x, true), b(y, true)),
            (Ltl::Until(x, y), false) => Nnf::Release(b(x, false), b(y, false)),
        }
    }
}

/// Shape of a finite label sequence of length `len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathShape {
    /// Positions `0..len` and nothing beyond.
    Finite,
    /// After position `len - 1` the path continues at `loop_start`.
    Lasso { loop_start: usize },
}

/// Truth value at position 0. `label(a, i)` answers whether atom `a` holds
/// at position `i`.
pub fn evaluate<A>(f: &Nnf<A>, len: usize, shape: PathShape, label: &impl Fn(&A, usize) -> bool) -> bool {
    assert!(len > 0, "empty path");
    if let PathShape::Lasso { loop_start } = shape {
        assert!(loop_start < len, "loop start out of range");
    }
    values(f, len, shape, label)[0]
}

fn values<A>(f: &Nnf<A>, len: usize, shape: PathShape, label: &impl Fn(&A, usize) -> bool) -> Vec<bool> {
    let succ = |i: usize| -> Option<usize> {
        if i + 1 < len {
            Some(i + 1)
        } else {
            match shape {
                PathShape::Finite => None,
                PathShape::Lasso { loop_start } => Some(loop_start),
            }
        }
    };
    let rec = |g: &Nnf<A>| values(g, len, shape, label);
    match f {
        Nnf::True => vec![true; len],
        Nnf::False => vec![false; len],
        Nnf::Lit(a, p) => (0..len).map(|i| label(a, i) == *p).collect(),
        Nnf::And(x, y) => rec(x).iter().zip(rec(y)).map(|(a, b)| *a && b).collect(),
        Nnf::Or(x, y) => rec(x).iter().zip(rec(y)).map(|(a, b)| *a || b).collect(),
        Nnf::Next(x) => {
            let v = rec(x);
            (0..len).map(|i| succ(i).is_some_and(|j| v[j])).collect()
        }
        Nnf::Until(x, y) => {
            let (a, b) = (rec(x), rec(y));
            // least fixpoint of v = b ∨ (a ∧ X v)
            fixpoint(len, false, |v, i| b[i] || (a[i] && succ(i).is_some_and(|j| v[j])))
        }
        Nnf::Release(x, y) => {
            let (a, b) = (rec(x), rec(y));
            // greatest fixpoint of v = b ∧ (a ∨ X v); past the end of a
            // finite path nothing is guaranteed, so `a` must occur
            fixpoint(len, true, |v, i| b[i] && (a[i] || succ(i).is_some_and(|j| v[j])))
        }
    }
}

fn fixpoint(len: usize, init: bool, step: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut v = vec![init; len];
    loop {
        let mut changed = false;
        for i in (0..len).rev() {
            let nv = step(&v, i);
            if nv != v[i] {
                v[i] = nv;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}
