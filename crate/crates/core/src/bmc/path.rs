use std::fmt;

use serde::Serialize;

use crate::abstraction::AbstractTransitionSystem;
use crate::par::Exec;
use crate::spec::{Nnf, PathShape, PropExpr, evaluate};

use super::tableau::vector_search;

/// A bounded abstract counterexample candidate.
///
/// A lasso is kept in stem/cycle form with the last stem state repeated as
/// the last cycle state, so the infinite run is `stem · cycle^ω`. Its length
/// is the number of transitions in `stem · cycle`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbstractPath {
    NoLoop(Vec<usize>),
    Lasso { stem: Vec<usize>, cycle: Vec<usize> },
}

impl AbstractPath {
    /// Lasso over positions `p` whose last position steps back to `p[loop_start]`.
    pub fn lasso_from_walk(p: &[usize], loop_start: usize) -> Self {
        let stem = p[..=loop_start].to_vec();
        let mut cycle = p[loop_start + 1..].to_vec();
        cycle.push(p[loop_start]);
        AbstractPath::Lasso { stem, cycle }
    }

    pub fn len(&self) -> usize {
        match self {
            AbstractPath::NoLoop(s) => s.len() - 1,
            AbstractPath::Lasso { stem, cycle } => stem.len() - 1 + cycle.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_lasso(&self) -> bool {
        matches!(self, AbstractPath::Lasso { .. })
    }

    /// State ids in order; for a lasso, stem followed by one cycle copy.
    pub fn states(&self) -> Vec<usize> {
        match self {
            AbstractPath::NoLoop(s) => s.clone(),
            AbstractPath::Lasso { stem, cycle } => stem.iter().chain(cycle).copied().collect(),
        }
    }

    /// First `len` states of the run (a no-loop path is not extended).
    pub fn unrolled(&self, len: usize) -> Vec<usize> {
        match self {
            AbstractPath::NoLoop(s) => s.iter().copied().take(len).collect(),
            AbstractPath::Lasso { stem, cycle } => stem.iter().chain(cycle.iter().cycle()).copied().take(len).collect(),
        }
    }

    /// Whether every step is an edge of `ts` and the shape invariants hold.
    pub fn is_valid(&self, ts: &AbstractTransitionSystem) -> bool {
        let edges_ok = |s: &[usize]| s.windows(2).all(|w| ts.has_edge(w[0], w[1]));
        match self {
            AbstractPath::NoLoop(s) => {
                let mut sorted = s.clone();
                sorted.sort_unstable();
                sorted.dedup();
                !s.is_empty() && sorted.len() == s.len() && edges_ok(s)
            }
            AbstractPath::Lasso { stem, cycle } => {
                !stem.is_empty() && !cycle.is_empty() && stem.last() == cycle.last() && edges_ok(&self.states())
            }
        }
    }

    pub fn display(&self, ts: &AbstractTransitionSystem) -> String {
        let names = |s: &[usize]| s.iter().map(|&i| ts.state(i).name.as_str()).collect::<Vec<_>>().join(" ");
        match self {
            AbstractPath::NoLoop(s) => names(s),
            AbstractPath::Lasso { stem, cycle } => format!("{} ({})^w", names(stem), names(cycle)),
        }
    }

    /// Ordering used to pick among lassos of equal length: cycle first,
    /// then stem, each lexicographically.
    pub(crate) fn lasso_key(&self) -> Option<(&[usize], &[usize])> {
        match self {
            AbstractPath::Lasso { stem, cycle } => Some((cycle, stem)),
            AbstractPath::NoLoop(_) => None,
        }
    }
}

impl fmt::Display for AbstractPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids = |s: &[usize]| s.iter().map(|i| format!("s{i}")).collect::<Vec<_>>().join(" ");
        match self {
            AbstractPath::NoLoop(s) => f.write_str(&ids(s)),
            AbstractPath::Lasso { stem, cycle } => write!(f, "{} ({})^w", ids(stem), ids(cycle)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathJson {
    pub kind: &'static str,
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

impl PathJson {
    pub fn new(path: &AbstractPath, ts: &AbstractTransitionSystem) -> Self {
        let names = |s: &[usize]| s.iter().map(|&i| ts.state(i).name.clone()).collect();
        match path {
            AbstractPath::NoLoop(s) => PathJson { kind: "no-loop", stem: names(s), cycle: Vec::new() },
            AbstractPath::Lasso { stem, cycle } => PathJson { kind: "lasso", stem: names(stem), cycle: names(cycle) },
        }
    }
}

/// Bounded counterexample search. `negated` is the negation of the checked
/// property, in negation normal form over predicate combinations.
pub trait SearchBackend {
    fn find(&self, ts: &AbstractTransitionSystem, negated: &Nnf<PropExpr>, k: usize) -> Option<AbstractPath>;
}

/// Explicit depth-first enumeration of every walk of the requested length.
/// Exponential in `k`; kept as a reference for [`VectorSearch`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExplicitSearch {
    pub exec: Exec,
}

impl SearchBackend for ExplicitSearch {
    fn find(&self, ts: &AbstractTransitionSystem, negated: &Nnf<PropExpr>, k: usize) -> Option<AbstractPath> {
        explicit_search(ts, negated, k, self.exec)
    }
}

/// Backward search over subformula truth vectors. Returns exactly what
/// [`ExplicitSearch`] returns.
#[derive(Clone, Copy, Debug, Default)]
pub struct VectorSearch {
    pub exec: Exec,
}

impl SearchBackend for VectorSearch {
    fn find(&self, ts: &AbstractTransitionSystem, negated: &Nnf<PropExpr>, k: usize) -> Option<AbstractPath> {
        vector_search(ts, negated, k, self.exec)
    }
}

/// A path of length exactly `k` from an initial state whose bounded
/// semantics satisfies `negated`. No-loop paths are tried first; the
/// lexicographically smallest one wins. Otherwise the lasso with the
/// smallest (cycle, stem) is returned.
pub fn find_counterexample(ts: &AbstractTransitionSystem, negated: &Nnf<PropExpr>, k: usize) -> Option<AbstractPath> {
    vector_search(ts, negated, k, ts.exec())
}

pub fn find_counterexample_with(
    ts: &AbstractTransitionSystem,
    negated: &Nnf<PropExpr>,
    k: usize,
    exec: Exec,
) -> Option<AbstractPath> {
    vector_search(ts, negated, k, exec)
}

pub fn explicit_search(
    ts: &AbstractTransitionSystem,
    negated: &Nnf<PropExpr>,
    k: usize,
    exec: Exec,
) -> Option<AbstractPath> {
    if k == 0 || *negated == Nnf::False {
        return None;
    }
    let holds_on = |walk: &[usize], shape: PathShape| {
        let label = |e: &PropExpr, i: usize| e.eval(&ts.state(walk[i]).valuation);
        evaluate(negated, walk.len(), shape, &label)
    };
    let initial = ts.initial();

    let noloops = exec.map(initial, |&s0| {
        let mut found = None;
        let mut walk = vec![s0];
        dfs(ts, &mut walk, k + 1, true, &mut |w| {
            if holds_on(w, PathShape::Finite) {
                found = Some(w.to_vec());
                true
            } else {
                false
            }
        });
        found
    });
    if let Some(p) = noloops.into_iter().flatten().next() {
        return Some(AbstractPath::NoLoop(p));
    }

    let lassos = exec.map(initial, |&s0| {
        let mut best: Option<AbstractPath> = None;
        let mut walk = vec![s0];
        dfs(ts, &mut walk, k, false, &mut |w| {
            let last = *w.last().unwrap();
            for l in 0..w.len() {
                if !ts.has_edge(last, w[l]) || !holds_on(w, PathShape::Lasso { loop_start: l }) {
                    continue;
                }
                let cand = AbstractPath::lasso_from_walk(w, l);
                if best.as_ref().is_none_or(|b| cand.lasso_key() < b.lasso_key()) {
                    best = Some(cand);
                }
            }
            false
        });
        best
    });
    lassos.into_iter().flatten().min_by(|a, b| a.lasso_key().cmp(&b.lasso_key()))
}

/// Extends `walk` along edges in ascending order until it has `len` states,
/// calling `visit` on each complete walk. Stops early when `visit` returns
/// true, and reports whether it did.
fn dfs(
    ts: &AbstractTransitionSystem,
    walk: &mut Vec<usize>,
    len: usize,
    distinct: bool,
    visit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if walk.len() == len {
        return visit(walk);
    }
    let last = *walk.last().unwrap();
    for &next in ts.successors(last) {
        if distinct && walk.contains(&next) {
            continue;
        }
        walk.push(next);
        let stop = dfs(ts, walk, len, distinct, visit);
        walk.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Every no-loop path with exactly `k` transitions from an initial state.
pub fn noloop_paths(ts: &AbstractTransitionSystem, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for &s0 in ts.initial() {
        let mut walk = vec![s0];
        dfs(ts, &mut walk, k + 1, true, &mut |w| {
            out.push(w.to_vec());
            false
        });
    }
    out
}
