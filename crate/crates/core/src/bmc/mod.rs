//! Bounded model checking over the abstraction with spuriousness checks
//! and refinement, up to the completeness threshold.

mod concrete;
mod path;
mod spurious;
mod tableau;

use std::fmt;

use serde::Serialize;

use crate::abstraction::{AbstractTransitionSystem, PredicateSet};
use crate::dbm::Dbm;
use crate::error::{Error, Result};
use crate::maxplus::{MaxPlusMatrix, SearchCaps, SpectralProfile};
use crate::num::Num;
use crate::par::Exec;
use crate::spec::{DirectVerdict, Ltl, LtlFormula, Nnf, PredicateFormula, PropExpr, direct_check, simplify, translate};

pub use concrete::{Concretization, concrete_violation, concretize, window_len};
pub use path::{
    AbstractPath, ExplicitSearch, PathJson, SearchBackend, VectorSearch, explicit_search, find_counterexample,
    find_counterexample_with, noloop_paths,
};
pub use spurious::{
    PathPosition, SpuriousnessResult, Status, forward_chain, is_spurious_lasso, is_spurious_noloop, pivot_of,
};

/// `k0 + c` for an irreducible matrix, `None` for a reducible one.
pub fn completeness_threshold(a: &MaxPlusMatrix, caps: SearchCaps) -> Result<Option<SpectralProfile>> {
    if !a.is_irreducible() {
        return Ok(None);
    }
    a.transient_cyclicity_with(caps).map(Some)
}

/// Spuriousness of any candidate path.
pub fn check_path(ts: &AbstractTransitionSystem, path: &AbstractPath, max_iter: usize) -> SpuriousnessResult {
    match path {
        AbstractPath::NoLoop(s) => is_spurious_noloop(ts, s, ts.init_region()),
        AbstractPath::Lasso { stem, cycle } => is_spurious_lasso(ts, stem, cycle, ts.init_region(), max_iter),
    }
}

/// State id at a path position.
pub fn state_at(path: &AbstractPath, pos: PathPosition) -> usize {
    match (path, pos) {
        (AbstractPath::NoLoop(s), PathPosition::Stem(i)) => s[i],
        (AbstractPath::Lasso { stem, .. }, PathPosition::Stem(i)) => stem[i],
        (AbstractPath::Lasso { cycle, .. }, PathPosition::Loop(i)) => cycle[i],
        (AbstractPath::NoLoop(_), PathPosition::Loop(_)) => unreachable!("no-loop paths have no cycle"),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Cap on cycle unrollings when checking a lasso.
    pub max_iter: usize,
    /// Cap on refinements over the whole run.
    pub max_refinements: usize,
    pub caps: SearchCaps,
    pub exec: Exec,
    /// Skip the abstraction-free checks.
    pub skip_direct: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_iter: 1000,
            max_refinements: 1000,
            caps: SearchCaps::default(),
            exec: Exec::default(),
            skip_direct: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Violated,
    Undecided,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "holds",
            Outcome::Violated => "violated",
            Outcome::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Bound { k: usize },
    Candidate { k: usize, path: String },
    Spurious { path: String, pivot: String, witnesses: Vec<String> },
    Refined { pivot: String, into: Vec<String> },
    Real { path: String },
    Undecided { path: String, iterations: usize },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    /// Largest bound searched.
    pub bounds_explored: usize,
    pub refinements: usize,
    pub completeness_threshold: Option<usize>,
    /// Whether the threshold came from the transient and cyclicity.
    pub threshold_from_spectrum: bool,
    pub states: usize,
    pub edges: usize,
    pub predicates: usize,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub path: AbstractPath,
    pub names: String,
    pub witnesses: Vec<Dbm>,
    pub run: Option<Concretization>,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: String,
    pub counterexample: Option<Counterexample>,
    pub spectrum: Option<SpectralProfile>,
    pub stats: Stats,
    pub trace: Vec<TraceEvent>,
}

/// Verdict together with the abstraction it was reached on, if any.
#[derive(Clone, Debug)]
pub struct VerifyRun {
    pub verdict: Verdict,
    pub abstraction: Option<AbstractTransitionSystem>,
}

/// Replaces constant propositions by `true`/`false` and folds them away, so
/// that a formula decided by constants needs no path search.
fn fold_constants(f: &PredicateFormula) -> PredicateFormula {
    simplify(&f.map_atoms(|e| match e {
        PropExpr::Const(c) => Ltl::constant(*c),
        e => Ltl::Atom(e.clone()),
    }))
}

pub fn verify(a: &MaxPlusMatrix, init: Option<Dbm>, formula: &LtlFormula, opts: &VerifyOptions) -> Result<Verdict> {
    verify_detailed(a, init, formula, opts).map(|r| r.verdict)
}

pub fn verify_detailed(
    a: &MaxPlusMatrix,
    init: Option<Dbm>,
    formula: &LtlFormula,
    opts: &VerifyOptions,
) -> Result<VerifyRun> {
    a.check_regular()?;
    formula.check_indices(a.n())?;
    let mut stats = Stats::default();
    let spectrum = completeness_threshold(a, opts.caps)?;

    if !opts.skip_direct {
        let report = direct_check(a, formula)?;
        let outcome = match report.verdict {
            DirectVerdict::Holds => Some(Outcome::Holds),
            DirectVerdict::Violated => Some(Outcome::Violated),
            DirectVerdict::Inconclusive => None,
        };
        if let Some(outcome) = outcome {
            let reason = report.reason.map(|r| r.to_string()).unwrap_or_default();
            return Ok(VerifyRun {
                verdict: Verdict { outcome, reason, counterexample: None, spectrum, stats, trace: Vec::new() },
                abstraction: None,
            });
        }
    }

    let predicates = PredicateSet::for_atoms(a, &formula.distinct_atoms())?;
    let mut ts = AbstractTransitionSystem::build(a, predicates, init, opts.exec)?;
    let translated = translate(a, formula, ts.predicates())?;
    let negated: Nnf<PropExpr> = Nnf::from_ltl(&fold_constants(&translated).negate());
    let backend = VectorSearch { exec: opts.exec };

    let ct = match &spectrum {
        Some(p) => {
            stats.threshold_from_spectrum = true;
            p.threshold()
        }
        None => ts.len() + 1,
    };
    stats.completeness_threshold = Some(ct);
    stats.predicates = ts.predicates().len();
    let transient = spectrum.map_or(ts.len(), |p| p.transient);

    let mut trace = Vec::new();
    let finish = |ts: AbstractTransitionSystem,
                  mut stats: Stats,
                  trace: Vec<TraceEvent>,
                  outcome: Outcome,
                  reason: String,
                  counterexample: Option<Counterexample>| {
        stats.states = ts.len();
        stats.edges = ts.edge_count();
        VerifyRun {
            verdict: Verdict { outcome, reason, counterexample, spectrum, stats, trace },
            abstraction: Some(ts),
        }
    };

    for k in 1..=ct {
        stats.bounds_explored = k;
        trace.push(TraceEvent::Bound { k });
        while let Some(path) = backend.find(&ts, &negated, k) {
            let names = path.display(&ts);
            trace.push(TraceEvent::Candidate { k, path: names.clone() });
            let result = check_path(&ts, &path, opts.max_iter);
            match result.status {
                Status::Real => {
                    trace.push(TraceEvent::Real { path: names.clone() });
                    let run = concretize(&ts, &path, transient)?;
                    let cex = Counterexample { path, names, witnesses: result.witnesses, run: Some(run) };
                    let reason = format!("bmc: counterexample of length {k}");
                    return Ok(finish(ts, stats, trace, Outcome::Violated, reason, Some(cex)));
                }
                Status::Undecided => {
                    trace.push(TraceEvent::Undecided { path: names.clone(), iterations: opts.max_iter });
                    let reason = format!("bmc: no period found for {names} within {} unrollings", opts.max_iter);
                    let cex = Counterexample { path, names, witnesses: result.witnesses, run: None };
                    return Ok(finish(ts, stats, trace, Outcome::Undecided, reason, Some(cex)));
                }
                Status::Spurious => {
                    let pos = result.pivot.ok_or_else(|| Error::Internal("spurious path without pivot".into()))?;
                    let pivot = state_at(&path, pos);
                    trace.push(TraceEvent::Spurious {
                        path: names,
                        pivot: ts.state(pivot).name.clone(),
                        witnesses: result.witnesses.iter().map(|d| d.to_string()).collect(),
                    });
                    if stats.refinements >= opts.max_refinements {
                        let reason = format!("bmc: refinement cap of {} reached", opts.max_refinements);
                        return Ok(finish(ts, stats, trace, Outcome::Undecided, reason, None));
                    }
                    let pivot_name = ts.state(pivot).name.clone();
                    let cells = ts.refine(pivot)?;
                    stats.refinements += 1;
                    trace.push(TraceEvent::Refined {
                        pivot: pivot_name,
                        into: cells.iter().map(|&i| ts.state(i).name.clone()).collect(),
                    });
                }
            }
        }
    }
    let reason = format!("bmc: no counterexample up to k = {ct}");
    Ok(finish(ts, stats, trace, Outcome::Holds, reason, None))
}

/// Length of the longest no-loop path of `ts` that some concrete run
/// realizes. Pruned depth-first search over the reachable-set chain.
pub fn longest_real_noloop(ts: &AbstractTransitionSystem) -> usize {
    fn go(ts: &AbstractTransitionSystem, walk: &mut Vec<usize>, reach: &Dbm, best: &mut usize) {
        *best = (*best).max(walk.len() - 1);
        let last = *walk.last().unwrap();
        let image = reach.image(&ts.state(last).dynamics);
        for &next in ts.successors(last) {
            if walk.contains(&next) {
                continue;
            }
            if let Some(e) = image.intersect(&ts.state(next).region) {
                walk.push(next);
                go(ts, walk, &e, best);
                walk.pop();
            }
        }
    }
    let mut best = 0;
    for &s in ts.initial() {
        if let Some(first) = ts.state(s).region.intersect(ts.init_region()) {
            go(ts, &mut vec![s], &first, &mut best);
        }
    }
    best
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    outcome: Outcome,
    reason: &'a str,
    spectrum: Option<SpectralProfile>,
    stats: &'a Stats,
    counterexample: Option<CounterexampleJson<'a>>,
    trace: &'a [TraceEvent],
}

#[derive(Serialize)]
struct CounterexampleJson<'a> {
    path: &'a str,
    lasso: bool,
    witnesses: Vec<String>,
    trajectory: Option<&'a [Vec<Num>]>,
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        VerdictJson {
            outcome: self.outcome,
            reason: &self.reason,
            spectrum: self.spectrum,
            stats: &self.stats,
            counterexample: self.counterexample.as_ref().map(|c| CounterexampleJson {
                path: &c.names,
                lasso: c.path.is_lasso(),
                witnesses: c.witnesses.iter().map(|d| d.to_string()).collect(),
                trajectory: c.run.as_ref().map(|r| r.trajectory.as_slice()),
            }),
            trace: &self.trace,
        }
        .serialize(s)
    }
}
