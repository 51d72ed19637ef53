//! Counterexample search over per-position truth vectors.
//!
//! The truth of every subformula at a position is a function of the state
//! label there and of the truth vector one position later. Paths can then
//! be explored backwards as `(state, vector)` pairs, which keeps the work
//! polynomial in the bound instead of enumerating every walk. On a cycle
//! the backward recurrence also admits wrong fixpoints; they are excluded
//! by requiring every until that holds on the cycle to meet its right
//! operand there, and every release that fails to meet a failing right
//! operand there.

use std::collections::{HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::abstraction::AbstractTransitionSystem;
use crate::par::Exec;
use crate::spec::{Nnf, PropExpr};

use super::path::{AbstractPath, explicit_search};

type Bits = u128;

const MAX_NODES: usize = Bits::BITS as usize;
/// Anchors per state grow as `2^reads`; past this the explicit search is used.
const MAX_READS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(usize, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

fn bit(v: Bits, i: usize) -> bool {
    v >> i & 1 == 1
}

type CycleLayer = HashSet<(usize, Bits, Bits)>;
type StemLayer = HashSet<(usize, Bits)>;

struct Tableau<'a> {
    ts: &'a AbstractTransitionSystem,
    nodes: Vec<Node>,
    root: usize,
    /// Positions of the next vector that `step` reads.
    reads: Bits,
    labels: Vec<Bits>,
    preds: Vec<Vec<usize>>,
    initial: Vec<bool>,
}

impl<'a> Tableau<'a> {
    fn new(ts: &'a AbstractTransitionSystem, f: &Nnf<PropExpr>) -> Option<Self> {
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        let mut atoms = Vec::new();
        let root = compile(f, &mut nodes, &mut index, &mut atoms)?;
        let reads = nodes.iter().enumerate().fold(0, |acc, (i, n)| match *n {
            Node::Next(x) => acc | 1 << x,
            Node::Until(..) | Node::Release(..) => acc | 1 << i,
            _ => acc,
        });
        if Bits::count_ones(reads) > MAX_READS {
            return None;
        }
        let labels = ts
            .states()
            .iter()
            .map(|s| {
                atoms.iter().enumerate().fold(0, |acc, (i, e)| if e.eval(&s.valuation) { acc | 1 << i } else { acc })
            })
            .collect();
        let mut preds = vec![Vec::new(); ts.len()];
        for s in 0..ts.len() {
            for &t in ts.successors(s) {
                preds[t].push(s);
            }
        }
        let mut initial = vec![false; ts.len()];
        for &s in ts.initial() {
            initial[s] = true;
        }
        Some(Tableau { ts, nodes, root, reads, labels, preds, initial })
    }

    /// Truth vector at a position labelled `label` followed by `next`. A
    /// zero `next` stands for the end of a finite path.
    fn step(&self, label: Bits, next: Bits) -> Bits {
        let mut v: Bits = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            let on = match *n {
                Node::True => true,
                Node::False => false,
                Node::Lit(a, p) => bit(label, a) == p,
                Node::And(x, y) => bit(v, x) && bit(v, y),
                Node::Or(x, y) => bit(v, x) || bit(v, y),
                Node::Next(x) => bit(next, x),
                Node::Until(x, y) => bit(v, y) || (bit(v, x) && bit(next, i)),
                Node::Release(x, y) => bit(v, y) && (bit(v, x) || bit(next, i)),
            };
            if on {
                v |= 1 << i;
            }
        }
        v
    }

    fn step_at(&self, s: usize, next: Bits) -> Bits {
        self.step(self.labels[s], next)
    }

    /// Eventualities that a cycle entered with vector `w` must discharge.
    fn obligations(&self, w: Bits) -> Bits {
        self.nodes.iter().enumerate().fold(0, |acc, (i, n)| match *n {
            Node::Until(..) if bit(w, i) => acc | 1 << i,
            Node::Release(..) if !bit(w, i) => acc | 1 << i,
            _ => acc,
        })
    }

    /// Eventualities discharged at a position with vector `v`.
    fn discharged(&self, v: Bits) -> Bits {
        self.nodes.iter().enumerate().fold(0, |acc, (i, n)| match *n {
            Node::Until(_, y) if bit(v, y) => acc | 1 << i,
            Node::Release(_, y) if !bit(v, y) => acc | 1 << i,
            _ => acc,
        })
    }

    fn eventualities(&self) -> Bits {
        self.nodes.iter().enumerate().fold(0, |acc, (i, n)| match n {
            Node::Until(..) | Node::Release(..) => acc | 1 << i,
            _ => acc,
        })
    }

    fn accepts(&self, s: usize, v: Bits) -> bool {
        self.initial[s] && bit(v, self.root)
    }

    /// Whether `v`, placed after the states of `prefix`, makes the formula
    /// true at the start.
    fn holds_before(&self, prefix: &[usize], v: Bits) -> bool {
        bit(prefix.iter().rev().fold(v, |v, &s| self.step_at(s, v)), self.root)
    }

    fn search(&self, k: usize, exec: Exec) -> Option<AbstractPath> {
        if let Some(p) = self.noloop(k, exec) {
            return Some(AbstractPath::NoLoop(p));
        }
        self.lasso(k, exec)
    }

    /// Smallest simple path of `k` transitions satisfying the formula. The
    /// depth-first search is pruned by what walks of the remaining length
    /// can still achieve, ignoring distinctness.
    fn noloop(&self, k: usize, exec: Exec) -> Option<Vec<usize>> {
        let n = self.ts.len();
        let mut back: Vec<Vec<Vec<Bits>>> = vec![(0..n).map(|s| vec![self.step_at(s, 0)]).collect()];
        for r in 1..=k {
            let prev = &back[r - 1];
            let layer = (0..n)
                .map(|s| {
                    let mut vs: Vec<Bits> =
                        self.ts.successors(s).iter().flat_map(|&t| &prev[t]).map(|&v| self.step_at(s, v)).collect();
                    vs.sort_unstable();
                    vs.dedup();
                    vs
                })
                .collect();
            back.push(layer);
        }
        if !self.ts.initial().iter().any(|&s| back[k][s].iter().any(|&v| bit(v, self.root))) {
            return None;
        }
        let found = exec.map(self.ts.initial(), |&s0| {
            let mut walk = vec![s0];
            self.extend(&back, &mut walk, k).then_some(walk)
        });
        found.into_iter().flatten().next()
    }

    fn extend(&self, back: &[Vec<Vec<Bits>>], walk: &mut Vec<usize>, k: usize) -> bool {
        let i = walk.len() - 1;
        let s = walk[i];
        if !back[k - i][s].iter().any(|&v| self.holds_before(&walk[..i], v)) {
            return false;
        }
        if i == k {
            return true;
        }
        for &t in self.ts.successors(s) {
            if walk.contains(&t) {
                continue;
            }
            walk.push(t);
            if self.extend(back, walk, k) {
                return true;
            }
            walk.pop();
        }
        false
    }

    /// Candidate vectors at a loop start in state `a`.
    fn anchors(&self, a: usize) -> Vec<Bits> {
        let mut out = Vec::new();
        let mut sub = self.reads;
        loop {
            out.push(self.step_at(a, sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & self.reads;
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn lasso(&self, k: usize, exec: Exec) -> Option<AbstractPath> {
        let g = Product::new(self);
        let anchors: Vec<usize> =
            (0..g.nodes.len()).filter(|&x| g.good[g.comp[x]] && g.dist[x].is_some_and(|d| d < k)).collect();
        let found = exec.map(&anchors, |&x| self.lasso_at(&g, x, k));
        found.into_iter().flatten().min_by(|x, y| x.lasso_key().cmp(&y.lasso_key()))
    }

    /// Best lasso of length `k` whose loop starts at product node `x`.
    fn lasso_at(&self, g: &Product, x: usize, k: usize) -> Option<AbstractPath> {
        let (a, w) = g.nodes[x];
        let reach = g.dist[x]?;
        let shortest = g.shortest_cycle(x)?;
        if reach + shortest > k {
            return None;
        }
        let comp = g.comp[x];
        let ob = self.obligations(w);
        // cycle[d]: (state, vector, discharged) d positions before the loop closes
        let mut cycle: Vec<CycleLayer> = vec![HashSet::from([(a, w, 0)])];
        for d in 1..=k - reach {
            let layer = cycle[d - 1]
                .iter()
                .flat_map(|&(t, v, f)| {
                    self.preds[t].iter().filter_map(move |&s| {
                        let u = self.step_at(s, v);
                        (g.comp[g.ids[&(s, u)]] == comp).then(|| (s, u, f | (self.discharged(u) & ob)))
                    })
                })
                .collect();
            cycle.push(layer);
        }
        let closing: Vec<usize> = (shortest..=k - reach).filter(|&m| cycle[m].contains(&(a, w, ob))).collect();
        let longest_stem = k - *closing.first()?;

        let mut stem: Vec<StemLayer> = vec![HashSet::from([(a, w)])];
        for d in 1..=longest_stem {
            let layer = stem[d - 1]
                .iter()
                .flat_map(|&(t, v)| self.preds[t].iter().map(move |&s| (s, self.step_at(s, v))))
                .filter(|sv| g.dist[g.ids[sv]].is_some_and(|r| r + d <= longest_stem))
                .collect();
            stem.push(layer);
        }
        let (cyc, m) = closing
            .into_iter()
            .filter(|&m| stem[k - m].iter().any(|&(s, v)| self.accepts(s, v)))
            .map(|m| (self.smallest_cycle(&cycle, a, w, ob, m), m))
            .min()?;
        let stem = self.smallest_stem(&stem, k - m);
        Some(AbstractPath::Lasso { stem, cycle: cyc })
    }

    /// Lexicographically smallest cycle `p[L+1..] p[L]` of length `m`,
    /// read off the backward layers front to back.
    fn smallest_cycle(&self, layers: &[CycleLayer], a: usize, w: Bits, ob: Bits, m: usize) -> Vec<usize> {
        let mut cur = vec![(a, w, ob)];
        let mut seq = Vec::with_capacity(m);
        for layer in layers[1..m].iter().rev() {
            let cands: Vec<(usize, Bits, Bits)> = layer
                .iter()
                .filter(|&&(s, v, f)| {
                    cur.iter().any(|&(t, u, g)| {
                        self.ts.has_edge(t, s) && self.step_at(t, v) == u && f | (self.discharged(u) & ob) == g
                    })
                })
                .copied()
                .collect();
            let s = cands.iter().map(|c| c.0).min().expect("layers are backward closed");
            cur = cands.into_iter().filter(|c| c.0 == s).collect();
            seq.push(s);
        }
        seq.push(a);
        seq
    }

    /// Lexicographically smallest stem with `len` transitions into the anchor.
    fn smallest_stem(&self, layers: &[StemLayer], len: usize) -> Vec<usize> {
        let mut cur: Vec<(usize, Bits)> = layers[len].iter().filter(|&&(s, v)| self.accepts(s, v)).copied().collect();
        let first = cur.iter().map(|c| c.0).min().expect("stem was checked to exist");
        cur.retain(|c| c.0 == first);
        let mut seq = vec![first];
        for layer in layers[..len].iter().rev() {
            let cands: Vec<(usize, Bits)> = layer
                .iter()
                .filter(|&&(s, v)| cur.iter().any(|&(t, u)| self.ts.has_edge(t, s) && self.step_at(t, v) == u))
                .copied()
                .collect();
            let s = cands.iter().map(|c| c.0).min().expect("layers are backward closed");
            cur = cands.into_iter().filter(|c| c.0 == s).collect();
            seq.push(s);
        }
        seq
    }
}

/// The graph of `(state, vector)` pairs linked by consistent transitions.
/// Every lasso runs through it, with its cycle inside one strongly connected
/// component that meets each eventuality's fulfilment set, which bounds the
/// anchors worth searching from.
struct Product {
    nodes: Vec<(usize, Bits)>,
    ids: HashMap<(usize, Bits), usize>,
    succ: Vec<Vec<usize>>,
    /// Eventualities fulfilled at each node: untils that fail or meet their
    /// right operand, releases that hold or see theirs fail.
    fulfils: Vec<Bits>,
    everything: Bits,
    comp: Vec<usize>,
    good: Vec<bool>,
    /// Fewest transitions from an accepted initial node.
    dist: Vec<Option<usize>>,
}

impl Product {
    fn new(t: &Tableau) -> Self {
        let mut nodes = Vec::new();
        let mut ids = HashMap::new();
        let anchors: Vec<Vec<Bits>> = (0..t.ts.len()).map(|a| t.anchors(a)).collect();
        for (a, ws) in anchors.iter().enumerate() {
            for &w in ws {
                ids.insert((a, w), nodes.len());
                nodes.push((a, w));
            }
        }
        let mut graph = DiGraph::<(), ()>::with_capacity(nodes.len(), 0);
        for _ in &nodes {
            graph.add_node(());
        }
        let mut succ = vec![Vec::new(); nodes.len()];
        for s in 0..t.ts.len() {
            for &u in t.ts.successors(s) {
                for &w in &anchors[u] {
                    let (from, to) = (ids[&(s, t.step_at(s, w))], ids[&(u, w)]);
                    succ[from].push(to);
                    graph.add_edge(NodeIndex::new(from), NodeIndex::new(to), ());
                }
            }
        }
        let everything = t.eventualities();
        let fulfils: Vec<Bits> =
            nodes.iter().map(|&(_, v)| (t.discharged(v) | !t.obligations(v)) & everything).collect();

        let sccs = tarjan_scc(&graph);
        let mut comp = vec![0; nodes.len()];
        let mut good = Vec::with_capacity(sccs.len());
        for (c, members) in sccs.iter().enumerate() {
            let mut cover = 0;
            for x in members {
                comp[x.index()] = c;
                cover |= fulfils[x.index()];
            }
            let cyclic = members.len() > 1 || succ[members[0].index()].contains(&members[0].index());
            good.push(cyclic && cover == everything);
        }

        let mut dist = vec![None; nodes.len()];
        let mut queue: VecDeque<usize> = (0..nodes.len()).filter(|&x| t.accepts(nodes[x].0, nodes[x].1)).collect();
        for &x in &queue {
            dist[x] = Some(0);
        }
        while let Some(x) = queue.pop_front() {
            let d = dist[x].map(|d| d + 1);
            for &y in &succ[x] {
                if dist[y].is_none() {
                    dist[y] = d;
                    queue.push_back(y);
                }
            }
        }
        Product { nodes, ids, succ, fulfils, everything, comp, good, dist }
    }

    /// Length of the shortest closed walk through `x` that fulfils every
    /// eventuality.
    fn shortest_cycle(&self, x: usize) -> Option<usize> {
        let start = (x, self.fulfils[x]);
        let mut seen = HashSet::from([start]);
        let mut frontier = vec![start];
        let mut len = 0;
        while !frontier.is_empty() {
            len += 1;
            let mut next = Vec::new();
            for (y, f) in frontier {
                for &z in &self.succ[y] {
                    if self.comp[z] != self.comp[x] {
                        continue;
                    }
                    let g = f | self.fulfils[z];
                    if z == x && g == self.everything {
                        return Some(len);
                    }
                    if seen.insert((z, g)) {
                        next.push((z, g));
                    }
                }
            }
            frontier = next;
        }
        None
    }
}

/// Appends `f` in post-order with shared subterms, returning its index.
/// `None` once the vector width is exceeded.
fn compile(
    f: &Nnf<PropExpr>,
    nodes: &mut Vec<Node>,
    index: &mut HashMap<Node, usize>,
    atoms: &mut Vec<PropExpr>,
) -> Option<usize> {
    let mut sub = |g: &Nnf<PropExpr>| compile(g, nodes, index, atoms);
    let node = match f {
        Nnf::True => Node::True,
        Nnf::False => Node::False,
        Nnf::Lit(e, p) => {
            let id = match atoms.iter().position(|x| x == e) {
                Some(id) => id,
                None => {
                    atoms.push(e.clone());
                    atoms.len() - 1
                }
            };
            Node::Lit(id, *p)
        }
        Nnf::And(x, y) => Node::And(sub(x)?, sub(y)?),
        Nnf::Or(x, y) => Node::Or(sub(x)?, sub(y)?),
        Nnf::Next(x) => Node::Next(sub(x)?),
        Nnf::Until(x, y) => Node::Until(sub(x)?, sub(y)?),
        Nnf::Release(x, y) => Node::Release(sub(x)?, sub(y)?),
    };
    if let Some(&i) = index.get(&node) {
        return Some(i);
    }
    if nodes.len() == MAX_NODES {
        return None;
    }
    nodes.push(node);
    index.insert(node, nodes.len() - 1);
    Some(nodes.len() - 1)
}

/// Same result as the explicit enumeration, in time polynomial in `k` for a
/// fixed formula. Formulas too wide for a vector fall back to enumeration.
pub fn vector_search(
    ts: &AbstractTransitionSystem,
    negated: &Nnf<PropExpr>,
    k: usize,
    exec: Exec,
) -> Option<AbstractPath> {
    if k == 0 || *negated == Nnf::False {
        return None;
    }
    match Tableau::new(ts, negated) {
        Some(t) => t.search(k, exec),
        None => explicit_search(ts, negated, k, exec),
    }
}
