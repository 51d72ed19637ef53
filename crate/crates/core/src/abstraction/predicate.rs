use std::fmt;

use serde::Serialize;

use crate::dbm::{Bound, Constraint};
use crate::error::{Error, Result};
use crate::maxplus::MaxPlusMatrix;
use crate::num::Num;
use crate::spec::{TimeDiffProposition, constant_truth};

/// `x_i - x_j ≥ c` (or `> c` when `strict`). Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub i: usize,
    pub j: usize,
    pub c: Num,
    pub strict: bool,
}

impl Predicate {
    pub fn ge(i: usize, j: usize, c: Num) -> Self {
        Predicate { i, j, c, strict: false }
    }

    pub fn gt(i: usize, j: usize, c: Num) -> Self {
        Predicate { i, j, c, strict: true }
    }

    pub fn holds(&self, x: &[Num]) -> bool {
        let d = x[self.i] - x[self.j];
        if self.strict { d > self.c } else { d >= self.c }
    }

    /// The predicate as a DBM constraint: `x_j - x_i ≤ -c` (or `< -c`).
    pub fn constraint(&self) -> Constraint {
        let bound = Bound::Finite { value: -self.c, strict: self.strict };
        Constraint::new(self.j, self.i, bound)
    }

    /// The complement: `x_i - x_j < c` (or `≤ c`).
    pub fn negated_constraint(&self) -> Constraint {
        let bound = Bound::Finite { value: self.c, strict: !self.strict };
        Constraint::new(self.i, self.j, bound)
    }
}

/// Tuple form `(i, j, c, s)` with 1-based indices; `s = 1` for `≥`.
impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.i + 1, self.j + 1, self.c, u8::from(!self.strict))
    }
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Which pair of finite columns of a row a matrix predicate compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowPair {
    /// `lo < hi`; the predicate reads `x_lo + A(k,lo) ≥ x_hi + A(k,hi)`.
    pub lo: usize,
    pub hi: usize,
    pub id: usize,
}

/// Predicates comparing the finite terms of each row, deduplicated across
/// rows. `rows[k]` lists, for every pair of finite columns of row `k`, the
/// id of the predicate deciding which term dominates.
pub fn predicates_from_matrix(a: &MaxPlusMatrix) -> Result<(Vec<Predicate>, Vec<Vec<RowPair>>)> {
    a.check_regular()?;
    let mut union: Vec<Predicate> = Vec::new();
    let mut rows = Vec::with_capacity(a.n());
    for k in 0..a.n() {
        let fin = a.finite_columns(k);
        let mut pairs = Vec::new();
        for jj in 1..fin.len() {
            for ii in 0..jj {
                let (lo, hi) = (fin[ii], fin[jj]);
                let c = a.get(k, hi).finite().unwrap() - a.get(k, lo).finite().unwrap();
                let p = Predicate::ge(lo, hi, c);
                let id = match union.iter().position(|q| *q == p) {
                    Some(id) => id,
                    None => {
                        union.push(p);
                        union.len() - 1
                    }
                };
                pairs.push(RowPair { lo, hi, id });
            }
        }
        rows.push(pairs);
    }
    Ok((union, rows))
}

/// Predicates whose truth decides `t_i ∼ α`. For `≥`/`>` the atom is their
/// disjunction, for `≤`/`<` their conjunction.
pub fn predicates_from_timediff(a: &MaxPlusMatrix, prop: &TimeDiffProposition) -> Result<Vec<Predicate>> {
    let i = prop.index;
    if i >= a.n() {
        return Err(Error::IndexOutOfRange { index: i + 1, n: a.n() });
    }
    let alpha = prop.alpha;
    let strict = prop.op.is_strict();
    Ok(a.finite_columns(i)
        .into_iter()
        .filter(|&j| j != i)
        .map(|j| {
            let aij = a.get(i, j).finite().unwrap();
            if prop.op.is_lower_bound() {
                // x_j + A(i,j) - x_i ∼ α
                Predicate { i: j, j: i, c: alpha - aij, strict }
            } else {
                Predicate { i, j, c: aij - alpha, strict }
            }
        })
        .collect())
}

/// All predicates of an abstraction: the matrix ones first, then those of
/// each formula atom that are not already present.
#[derive(Clone, Debug)]
pub struct PredicateSet {
    predicates: Vec<Predicate>,
    matrix_count: usize,
    rows: Vec<Vec<RowPair>>,
    atoms: Vec<(TimeDiffProposition, Vec<usize>)>,
}

impl PredicateSet {
    pub fn from_matrix(a: &MaxPlusMatrix) -> Result<Self> {
        let (predicates, rows) = predicates_from_matrix(a)?;
        Ok(PredicateSet { matrix_count: predicates.len(), predicates, rows, atoms: Vec::new() })
    }

    /// Matrix predicates plus those of every atom of the formula.
    pub fn for_atoms(a: &MaxPlusMatrix, atoms: &[TimeDiffProposition]) -> Result<Self> {
        let mut set = Self::from_matrix(a)?;
        for p in atoms {
            set.add_atom(a, p)?;
        }
        Ok(set)
    }

    pub fn add_atom(&mut self, a: &MaxPlusMatrix, prop: &TimeDiffProposition) -> Result<()> {
        if self.atoms.iter().any(|(q, _)| q == prop) {
            return Ok(());
        }
        let mut ids = Vec::new();
        for p in predicates_from_timediff(a, prop)? {
            let id = match self.predicates.iter().position(|q| *q == p) {
                Some(id) => id,
                None => {
                    self.predicates.push(p);
                    self.predicates.len() - 1
                }
            };
            ids.push(id);
        }
        self.atoms.push((*prop, ids));
        Ok(())
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn matrix_count(&self) -> usize {
        self.matrix_count
    }

    pub fn row_pairs(&self, k: usize) -> &[RowPair] {
        &self.rows[k]
    }

    /// Predicate ids for a registered atom.
    pub fn atom_predicates(&self, prop: &TimeDiffProposition) -> Option<&[usize]> {
        self.atoms.iter().find(|(q, _)| q == prop).map(|(_, ids)| ids.as_slice())
    }

    pub fn atoms(&self) -> impl Iterator<Item = &TimeDiffProposition> {
        self.atoms.iter().map(|(p, _)| p)
    }

    /// Truth values of every predicate at `x`.
    pub fn valuation(&self, x: &[Num]) -> Vec<bool> {
        self.predicates.iter().map(|p| p.holds(x)).collect()
    }

    /// Truth of a registered atom under a valuation.
    pub fn atom_truth(&self, a: &MaxPlusMatrix, prop: &TimeDiffProposition, valuation: &[bool]) -> Option<bool> {
        if let Some(c) = constant_truth(a, prop) {
            return Some(c);
        }
        let ids = self.atom_predicates(prop)?;
        Some(if prop.op.is_lower_bound() {
            ids.iter().any(|&id| valuation[id])
        } else {
            ids.iter().all(|&id| valuation[id])
        })
    }
}
