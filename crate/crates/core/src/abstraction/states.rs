use crate::dbm::{AffineDynamics, Dbm};
use crate::error::{Error, Result};
use crate::maxplus::MaxPlusMatrix;
use crate::par::Exec;

use super::predicate::{Predicate, PredicateSet};

/// Splits the whole space by every predicate in turn, dropping empty cells.
/// At each split the cells where the predicate fails come first.
pub fn generate_abstract_states(n: usize, predicates: &[Predicate], exec: Exec) -> Vec<(Vec<bool>, Dbm)> {
    let mut frontier: Vec<(Vec<bool>, Dbm)> = vec![(Vec::with_capacity(predicates.len()), Dbm::universe(n))];
    for p in predicates {
        let split = exec.map(&frontier, |(val, region)| {
            let extend = |truth: bool| {
                let mut v = val.clone();
                v.push(truth);
                v
            };
            let neg = region.constrain(p.negated_constraint()).map(|r| (extend(false), r));
            let pos = region.constrain(p.constraint()).map(|r| (extend(true), r));
            (neg, pos)
        });
        let (negs, poss): (Vec<_>, Vec<_>) = split.into_iter().unzip();
        frontier = negs.into_iter().chain(poss).flatten().collect();
    }
    frontier
}

/// The affine map that `A ⊗ ·` reduces to on a cell: for each row the column
/// whose term dominates every other finite term, read off the valuation.
pub fn affine_dynamics_for_state(a: &MaxPlusMatrix, set: &PredicateSet, valuation: &[bool]) -> Result<AffineDynamics> {
    let n = a.n();
    let mut g = Vec::with_capacity(n);
    for k in 0..n {
        let fin = a.finite_columns(k);
        let pairs = set.row_pairs(k);
        // `lo` beats `hi` exactly when its predicate holds
        let wins = |w: usize, v: usize| -> bool {
            let (lo, hi) = if w < v { (w, v) } else { (v, w) };
            let pair = pairs.iter().find(|p| p.lo == lo && p.hi == hi).expect("pair recorded");
            valuation[pair.id] == (w == lo)
        };
        let winner = fin
            .iter()
            .copied()
            .find(|&w| fin.iter().all(|&v| v == w || wins(w, v)))
            .ok_or_else(|| Error::Internal(format!("no dominant term in row {} for this valuation", k + 1)))?;
        g.push(winner);
    }
    AffineDynamics::from_matrix(a, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn railway() -> MaxPlusMatrix {
        MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap()
    }

    #[test]
    fn railway_cells_and_dynamics() {
        let a = railway();
        let set = PredicateSet::from_matrix(&a).unwrap();
        let cells = generate_abstract_states(2, set.predicates(), Exec::Sequential);
        let dumps: Vec<String> = cells.iter().map(|(_, r)| r.to_string()).collect();
        assert_eq!(dumps, ["x1 - x2 < 0", "x1 - x2 < 3 && x2 - x1 <= 0", "x2 - x1 <= -3"]);
        let gs: Vec<Vec<usize>> =
            cells.iter().map(|(v, _)| affine_dynamics_for_state(&a, &set, v).unwrap().g.clone()).collect();
        assert_eq!(gs, [vec![1, 1], vec![1, 0], vec![0, 0]]);
    }

    #[test]
    fn tournament_with_three_terms() {
        // row 1 has three finite terms; check the winner against brute force
        let a = MaxPlusMatrix::from_ints(&[
            [Some(0), Some(1), Some(4)],
            [Some(2), None, Some(0)],
            [None, Some(3), Some(1)],
        ])
        .unwrap();
        let set = PredicateSet::from_matrix(&a).unwrap();
        for (val, region) in generate_abstract_states(3, set.predicates(), Exec::Parallel) {
            let dynamics = affine_dynamics_for_state(&a, &set, &val).unwrap();
            let x = region.some_point().unwrap();
            assert_eq!(dynamics.apply(&x), a.mat_vec(&x).unwrap());
            assert_eq!(set.valuation(&x), val);
        }
    }
}
