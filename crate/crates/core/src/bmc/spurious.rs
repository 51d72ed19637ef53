use std::collections::HashSet;

use serde::Serialize;

use crate::abstraction::AbstractTransitionSystem;
use crate::dbm::Dbm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Real,
    Spurious,
    Undecided,
}

/// Where on a path a state sits: a stem index, or a 0-based cycle phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathPosition {
    Stem(usize),
    Loop(usize),
}

#[derive(Clone, Debug)]
pub struct SpuriousnessResult {
    pub status: Status,
    /// Reachable sets along the path, as far as they stayed non-empty.
    pub witnesses: Vec<Dbm>,
    pub pivot: Option<PathPosition>,
}

/// Forward reachability along `states`, starting from `region ∩ init`.
/// Returns the non-empty prefix of the chain and whether it got through.
pub fn forward_chain(ts: &AbstractTransitionSystem, states: &[usize], init: &Dbm) -> (Vec<Dbm>, bool) {
    let mut chain: Vec<Dbm> = Vec::with_capacity(states.len());
    let Some(first) = ts.state(states[0]).region.intersect(init) else {
        return (chain, false);
    };
    chain.push(first);
    for w in states.windows(2) {
        let (prev, next) = (ts.state(w[0]), ts.state(w[1]));
        let image = chain.last().unwrap().image(&prev.dynamics);
        match image.intersect(&next.region) {
            Some(e) => chain.push(e),
            None => return (chain, false),
        }
    }
    (chain, true)
}

/// Spuriousness of a no-loop path by forward reachability.
pub fn is_spurious_noloop(ts: &AbstractTransitionSystem, states: &[usize], init: &Dbm) -> SpuriousnessResult {
    let (witnesses, ok) = forward_chain(ts, states, init);
    if ok {
        SpuriousnessResult { status: Status::Real, witnesses, pivot: None }
    } else {
        let pivot = witnesses.len().checked_sub(1).map(PathPosition::Stem);
        SpuriousnessResult { status: Status::Spurious, witnesses, pivot }
    }
}

/// Spuriousness of `stem · cycle^ω` (last stem state equal to last cycle
/// state). The cycle is unrolled until the reachable set at the end of an
/// unrolling equals one seen at the end of an earlier unrolling (real), a
/// set empties (spurious), or `max_iter` unrollings pass (undecided).
pub fn is_spurious_lasso(
    ts: &AbstractTransitionSystem,
    stem: &[usize],
    cycle: &[usize],
    init: &Dbm,
    max_iter: usize,
) -> SpuriousnessResult {
    let (mut witnesses, ok) = forward_chain(ts, stem, init);
    if !ok {
        let pivot = witnesses.len().checked_sub(1).map(PathPosition::Stem);
        return SpuriousnessResult { status: Status::Spurious, witnesses, pivot };
    }
    let m = cycle.len();
    let mut ends: HashSet<Dbm> = HashSet::new();
    let mut prev = *stem.last().unwrap();
    for _ in 0..max_iter {
        for &next in cycle {
            let image = witnesses.last().unwrap().image(&ts.state(prev).dynamics);
            match image.intersect(&ts.state(next).region) {
                Some(e) => witnesses.push(e),
                None => {
                    let pivot = Some(pivot_of(witnesses.len(), stem.len(), m));
                    return SpuriousnessResult { status: Status::Spurious, witnesses, pivot };
                }
            }
            prev = next;
        }
        let end = witnesses.last().unwrap().clone();
        if !ends.insert(end) {
            return SpuriousnessResult { status: Status::Real, witnesses, pivot: None };
        }
    }
    SpuriousnessResult { status: Status::Undecided, witnesses, pivot: None }
}

/// Position of the state carrying the last of `chain_len` non-empty sets.
pub fn pivot_of(chain_len: usize, stem_len: usize, loop_len: usize) -> PathPosition {
    assert!(chain_len > 0, "empty chain has no pivot");
    if chain_len <= stem_len {
        PathPosition::Stem(chain_len - 1)
    } else {
        PathPosition::Loop((chain_len - stem_len - 1) % loop_len)
    }
}
