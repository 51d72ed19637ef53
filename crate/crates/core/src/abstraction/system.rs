use std::fmt::Write as _;

use serde::Serialize;

use crate::dbm::{AffineDynamics, Dbm};
use crate::error::{Error, Result};
use crate::maxplus::MaxPlusMatrix;
use crate::num::Num;
use crate::par::Exec;

use super::predicate::PredicateSet;
use super::states::{affine_dynamics_for_state, generate_abstract_states};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractState {
    pub name: String,
    /// Truth value of each predicate of the set, by predicate id.
    pub valuation: Vec<bool>,
    pub region: Dbm,
    pub dynamics: AffineDynamics,
}

impl AbstractState {
    /// Ids of the predicates that hold on this state.
    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.valuation.iter().enumerate().filter(|(_, v)| **v).map(|(i, _)| i)
    }
}

/// Finite abstraction of `x(k+1) = A ⊗ x(k)`: cells of a partition of the
/// state space, each with its own affine dynamics, and the transitions that
/// some concrete point realizes.
#[derive(Clone, Debug)]
pub struct AbstractTransitionSystem {
    matrix: MaxPlusMatrix,
    predicates: PredicateSet,
    states: Vec<AbstractState>,
    successors: Vec<Vec<usize>>,
    initial: Vec<usize>,
    init_region: Dbm,
    exec: Exec,
}

/// `succ[i]` lists the `j` such that some point of cell `i` steps into cell `j`.
pub fn generate_transitions(states: &[AbstractState], exec: Exec) -> Vec<Vec<usize>> {
    exec.map(states, |s| successors_of(&s.region, &s.dynamics, states))
}

fn successors_of(region: &Dbm, dynamics: &AffineDynamics, states: &[AbstractState]) -> Vec<usize> {
    let image = region.image(dynamics);
    states.iter().enumerate().filter(|(_, t)| image.intersects(&t.region)).map(|(j, _)| j).collect()
}

/// Cells meeting the initial set.
pub fn initial_states(states: &[AbstractState], init: &Dbm) -> Vec<usize> {
    states.iter().enumerate().filter(|(_, s)| s.region.intersects(init)).map(|(i, _)| i).collect()
}

impl AbstractTransitionSystem {
    /// Abstraction with the matrix predicates only and every state initial.
    pub fn from_matrix(a: &MaxPlusMatrix, exec: Exec) -> Result<Self> {
        Self::build(a, PredicateSet::from_matrix(a)?, None, exec)
    }

    pub fn build(a: &MaxPlusMatrix, predicates: PredicateSet, init: Option<Dbm>, exec: Exec) -> Result<Self> {
        let n = a.n();
        if let Some(d) = &init {
            if d.n() != n {
                return Err(Error::Dimension(format!("initial set over {} clocks for n = {n}", d.n())));
            }
        }
        let cells = generate_abstract_states(n, predicates.predicates(), exec);
        let dynamics = exec.map(&cells, |(valuation, _)| affine_dynamics_for_state(a, &predicates, valuation));
        let states = cells
            .into_iter()
            .zip(dynamics)
            .enumerate()
            .map(|(i, ((valuation, region), dynamics))| {
                Ok(AbstractState { name: format!("s{i}"), valuation, region, dynamics: dynamics? })
            })
            .collect::<Result<Vec<_>>>()?;
        let successors = generate_transitions(&states, exec);
        let init_region = init.unwrap_or_else(|| Dbm::universe(n));
        let initial = initial_states(&states, &init_region);
        Ok(AbstractTransitionSystem { matrix: a.clone(), predicates, states, successors, initial, init_region, exec })
    }

    pub fn matrix(&self) -> &MaxPlusMatrix {
        &self.matrix
    }

    pub fn predicates(&self) -> &PredicateSet {
        &self.predicates
    }

    pub fn states(&self) -> &[AbstractState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &AbstractState {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.successors[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn init_region(&self) -> &Dbm {
        &self.init_region
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    /// The cell containing `x`.
    pub fn abstract_point(&self, x: &[Num]) -> Result<usize> {
        if x.len() != self.matrix.n() {
            return Err(Error::Dimension(format!("point of length {} for n = {}", x.len(), self.matrix.n())));
        }
        let valuation = self.predicates.valuation(x);
        let mut hits = self
            .states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.valuation == valuation && s.region.contains(x))
            .map(|(i, _)| i);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(i),
            (None, _) => Err(Error::Internal("point lies in no abstract state".into())),
            (Some(_), Some(_)) => Err(Error::Internal("point lies in several abstract states".into())),
        }
    }

    /// Splits `pivot` by which successor its points step into. The cells
    /// replace the pivot at its index, in successor order; later indices
    /// shift. Returns the indices of the new cells.
    pub fn refine(&mut self, pivot: usize) -> Result<Vec<usize>> {
        let succ = self.successors[pivot].clone();
        if succ.len() < 2 {
            return Err(Error::Internal(format!(
                "cannot split {} with {} successor(s)",
                self.states[pivot].name,
                succ.len()
            )));
        }
        let old = &self.states[pivot];
        let regions: Vec<Dbm> = succ
            .iter()
            .filter_map(|&t| {
                let pre = self.states[t].region.preimage(&old.dynamics)?;
                old.region.intersect(&pre)
            })
            .collect();
        if regions.len() < 2 {
            return Err(Error::Internal(format!("splitting {} produced a single cell", old.name)));
        }
        let cells: Vec<AbstractState> = regions
            .into_iter()
            .enumerate()
            .map(|(k, region)| AbstractState {
                name: format!("{}{}", old.name, suffix(k)),
                valuation: old.valuation.clone(),
                region,
                dynamics: old.dynamics.clone(),
            })
            .collect();
        let q = cells.len();
        let new_ids: Vec<usize> = (pivot..pivot + q).collect();
        let remap = |i: usize| if i < pivot { i } else { i + q - 1 };

        let mut states = Vec::with_capacity(self.states.len() + q - 1);
        states.extend_from_slice(&self.states[..pivot]);
        states.extend(cells);
        states.extend_from_slice(&self.states[pivot + 1..]);

        // predecessors of the pivot may reach any subset of the cells
        let mut successors: Vec<Vec<usize>> = Vec::with_capacity(states.len());
        let mut stale = Vec::new();
        for (i, list) in self.successors.iter().enumerate() {
            if i == pivot {
                for _ in 0..q {
                    successors.push(Vec::new());
                }
                continue;
            }
            if list.contains(&pivot) {
                stale.push(remap(i));
            }
            successors.push(list.iter().filter(|&&t| t != pivot).map(|&t| remap(t)).collect());
        }
        let recompute: Vec<usize> = new_ids.iter().copied().chain(stale).collect();
        let fresh = self.exec.map(&recompute, |&i| successors_of(&states[i].region, &states[i].dynamics, &states));
        for (i, list) in recompute.into_iter().zip(fresh) {
            successors[i] = list;
        }
        for list in &mut successors {
            list.sort_unstable();
        }

        let was_initial = self.initial.contains(&pivot);
        let mut initial: Vec<usize> = self.initial.iter().filter(|&&i| i != pivot).map(|&i| remap(i)).collect();
        if was_initial {
            initial.extend(new_ids.iter().copied().filter(|&i| states[i].region.intersects(&self.init_region)));
        }
        initial.sort_unstable();

        self.states = states;
        self.successors = successors;
        self.initial = initial;
        Ok(new_ids)
    }

    /// Human-readable listing of states, regions, dynamics and edges.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "predicates:");
        for (id, p) in self.predicates.predicates().iter().enumerate() {
            let _ = writeln!(out, "  p{id} {p}");
        }
        let _ = writeln!(out, "states: {}", self.len());
        for (i, s) in self.states.iter().enumerate() {
            let init = if self.initial.contains(&i) { " (initial)" } else { "" };
            let labels: Vec<String> = s.labels().map(|id| format!("p{id}")).collect();
            let _ = writeln!(out, "  {} {}{init}", s.name, s.dynamics);
            let _ = writeln!(out, "    region: {}", s.region);
            let _ = writeln!(out, "    labels: {{{}}}", labels.join(", "));
            let succ: Vec<&str> = self.successors[i].iter().map(|&j| self.states[j].name.as_str()).collect();
            let _ = writeln!(out, "    next: {}", succ.join(" "));
        }
        out
    }

    pub fn to_json(&self) -> AbstractionJson {
        AbstractionJson {
            predicates: self.predicates.predicates().iter().map(|p| p.to_string()).collect(),
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(i, s)| StateJson {
                    name: s.name.clone(),
                    region: s.region.constraints().map(|c| c.to_string()).collect(),
                    dynamics: s.dynamics.g.iter().map(|g| g + 1).collect(),
                    offsets: s.dynamics.offsets.clone(),
                    labels: s.labels().collect(),
                    initial: self.initial.contains(&i),
                    successors: self.successors[i].iter().map(|&j| self.states[j].name.clone()).collect(),
                })
                .collect(),
            edges: self.edge_count(),
        }
    }
}

fn suffix(k: usize) -> String {
    let mut s = String::new();
    let mut k = k;
    loop {
        s.insert(0, (b'a' + (k % 26) as u8) as char);
        if k < 26 {
            return s;
        }
        k = k / 26 - 1;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AbstractionJson {
    pub predicates: Vec<String>,
    pub states: Vec<StateJson>,
    pub edges: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateJson {
    pub name: String,
    pub region: Vec<String>,
    /// 1-based dominant column per row.
    pub dynamics: Vec<usize>,
    pub offsets: Vec<Num>,
    pub labels: Vec<usize>,
    pub initial: bool,
    pub successors: Vec<String>,
}
