use crate::abstraction::AbstractTransitionSystem;
use crate::error::{Error, Result};
use crate::num::Num;
use crate::spec::{Ltl, LtlFormula, Nnf, PathShape, constant_truth, evaluate, evaluate_timediff, simplify};

use super::path::AbstractPath;
use super::spurious::forward_chain;

/// A concrete run that follows an abstract counterexample.
#[derive(Clone, Debug)]
pub struct Concretization {
    /// Abstract states visited, one per window position.
    pub states: Vec<usize>,
    /// `x(0) ..= x(window)`; one point more than `states` so that the time
    /// differences of the last position are defined.
    pub trajectory: Vec<Vec<Num>>,
    /// For a lasso, the window position where the last cycle copy starts.
    pub loop_start: Option<usize>,
}

impl Concretization {
    pub fn window(&self) -> usize {
        self.states.len()
    }

    pub fn shape(&self) -> PathShape {
        match self.loop_start {
            Some(l) => PathShape::Lasso { loop_start: l },
            None => PathShape::Finite,
        }
    }
}

/// Number of positions to realize: the whole no-loop path, or the stem
/// followed by enough cycle copies to cover `transient` steps plus one more
/// full cycle.
pub fn window_len(path: &AbstractPath, transient: usize) -> usize {
    match path {
        AbstractPath::NoLoop(s) => s.len(),
        AbstractPath::Lasso { stem, cycle } => {
            let m = cycle.len();
            stem.len() + m * (transient.div_ceil(m) + 1)
        }
    }
}

/// Picks `x(0)` so that the run stays inside the abstract path for the
/// whole window, then simulates and checks the replay.
pub fn concretize(ts: &AbstractTransitionSystem, path: &AbstractPath, transient: usize) -> Result<Concretization> {
    let states = path.unrolled(window_len(path, transient));
    let (chain, ok) = forward_chain(ts, &states, ts.init_region());
    if !ok {
        return Err(Error::Internal(format!("path {path} is not realizable over {} steps", states.len())));
    }
    // pull the last reachable set back to the start
    let mut back = chain.last().unwrap().clone();
    for t in (0..states.len() - 1).rev() {
        let pre = back
            .preimage(&ts.state(states[t]).dynamics)
            .and_then(|p| p.intersect(&chain[t]))
            .ok_or_else(|| Error::Internal("backward chain emptied".into()))?;
        back = pre;
    }
    let x0 = back.some_point().ok_or_else(|| Error::Internal("no point in the initial set".into()))?;
    let a = ts.matrix();
    let mut trajectory = Vec::with_capacity(states.len() + 1);
    trajectory.push(x0);
    for _ in 0..states.len() {
        let next = a.mat_vec(trajectory.last().unwrap())?;
        trajectory.push(next);
    }
    for (t, &s) in states.iter().enumerate() {
        let actual = ts.abstract_point(&trajectory[t])?;
        if actual != s {
            return Err(Error::Internal(format!(
                "concrete run left the path at step {t}: {} instead of {}",
                ts.state(actual).name,
                ts.state(s).name
            )));
        }
    }
    let loop_start = match path {
        AbstractPath::NoLoop(_) => None,
        AbstractPath::Lasso { cycle, .. } => Some(states.len() - cycle.len()),
    };
    Ok(Concretization { states, trajectory, loop_start })
}

/// Whether the concrete run violates `formula`, with atoms evaluated on the
/// actual time differences. Atoms the matrix decides on its own are folded
/// first, as in the abstract search, so that a window witnesses exactly what
/// the abstract path did.
pub fn concrete_violation(ts: &AbstractTransitionSystem, formula: &LtlFormula, run: &Concretization) -> Result<bool> {
    let a = ts.matrix();
    let atoms = formula.distinct_atoms();
    let mut truth = vec![vec![false; atoms.len()]; run.window()];
    for (t, row) in truth.iter_mut().enumerate() {
        for (slot, atom) in row.iter_mut().zip(&atoms) {
            *slot = evaluate_timediff(a, &run.trajectory[t], atom)?;
        }
    }
    let folded = simplify(&formula.map_atoms(|p| match constant_truth(a, p) {
        Some(c) => Ltl::constant(c),
        None => Ltl::Atom(*p),
    }));
    let negated = Nnf::from_ltl(&folded.negate());
    let label = |p: &crate::spec::TimeDiffProposition, t: usize| {
        let id = atoms.iter().position(|q| q == p).expect("atom collected");
        truth[t][id]
    };
    Ok(evaluate(&negated, run.window(), run.shape(), &label))
}
