//! Difference-bound matrices over pure differences `x_i - x_j`.
//!
//! There is no reference-clock row: every set handled here is invariant
//! under adding the same constant to all coordinates, so absolute bounds
//! never occur. A [`Dbm`] value is always canonical and non-empty; every
//! operation that can empty a set returns `Option<Dbm>`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use rand::Rng;

use crate::error::{Error, Result};
use crate::maxplus::MaxPlusMatrix;
use crate::num::Num;

/// Upper bound on a difference: `≤ v`, `< v`, or no bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    Finite { value: Num, strict: bool },
    Infinite,
}

impl Bound {
    pub const ZERO: Bound = Bound::Finite { value: Num::ZERO, strict: false };

    pub fn le(value: Num) -> Self {
        Bound::Finite { value, strict: false }
    }

    pub fn lt(value: Num) -> Self {
        Bound::Finite { value, strict: true }
    }

    pub fn value(self) -> Option<Num> {
        match self {
            Bound::Finite { value, .. } => Some(value),
            Bound::Infinite => None,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Bound::Finite { strict: true, .. })
    }

    /// Whether `d` satisfies `d ≤ v` (or `d < v`).
    pub fn admits(self, d: Num) -> bool {
        match self {
            Bound::Finite { value, strict: true } => d < value,
            Bound::Finite { value, strict: false } => d <= value,
            Bound::Infinite => true,
        }
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Infinite, Bound::Infinite) => Ordering::Equal,
            (Bound::Infinite, _) => Ordering::Greater,
            (_, Bound::Infinite) => Ordering::Less,
            (Bound::Finite { value: a, strict: sa }, Bound::Finite { value: b, strict: sb }) => {
                a.cmp(b).then_with(|| sb.cmp(sa))
            }
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Bound {
    type Output = Bound;
    fn add(self, rhs: Bound) -> Bound {
        match (self, rhs) {
            (Bound::Finite { value: a, strict: sa }, Bound::Finite { value: b, strict: sb }) => {
                Bound::Finite { value: a + b, strict: sa || sb }
            }
            _ => Bound::Infinite,
        }
    }
}

/// `x_i - x_j ≤ bound` (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub bound: Bound,
}

impl Constraint {
    pub fn new(i: usize, j: usize, bound: Bound) -> Self {
        Constraint { i, j, bound }
    }

    /// Parses `x<i> - x<j> <op> <c>` with `op` one of `<`, `<=`, `>`, `>=`,
    /// `=`. Indices are 1-based in text. Equalities yield two constraints.
    pub fn parse(text: &str, n: usize) -> Result<Vec<Constraint>> {
        let bad = || Error::Constraint(text.trim().to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let var = |s: &str| -> Result<usize> {
            let idx: usize = s.strip_prefix('x').ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if idx == 0 || idx > n {
                return Err(Error::Constraint(format!("{}: index x{idx} out of range 1..={n}", text.trim())));
            }
            Ok(idx - 1)
        };
        let op_pos = compact.find(['<', '>', '=']).ok_or_else(bad)?;
        let (lhs, rest) = compact.split_at(op_pos);
        let (op, rhs) = if let Some(r) = rest.strip_prefix("<=") {
            ("<=", r)
        } else if let Some(r) = rest.strip_prefix(">=") {
            (">=", r)
        } else if let Some(r) = rest.strip_prefix("==") {
            ("=", r)
        } else {
            rest.split_at(1)
        };
        let (a, b) = lhs.split_once('-').ok_or_else(bad)?;
        let (i, j) = (var(a)?, var(b)?);
        if i == j {
            return Err(bad());
        }
        let c: Num = rhs.parse().map_err(|_| bad())?;
        Ok(match op {
            "<" => vec![Constraint::new(i, j, Bound::lt(c))],
            "<=" => vec![Constraint::new(i, j, Bound::le(c))],
            ">" => vec![Constraint::new(j, i, Bound::lt(-c))],
            ">=" => vec![Constraint::new(j, i, Bound::le(-c))],
            "=" => vec![Constraint::new(i, j, Bound::le(c)), Constraint::new(j, i, Bound::le(-c))],
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::Finite { value, strict } => {
                write!(f, "x{} - x{} {} {}", self.i + 1, self.j + 1, if strict { "<" } else { "<=" }, value)
            }
            Bound::Infinite => write!(f, "x{} - x{} < inf", self.i + 1, self.j + 1),
        }
    }
}

/// Affine dynamics `x'_i = x_{g_i} + offsets_i` active on one region.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineDynamics {
    /// 0-based column chosen for each row.
    pub g: Vec<usize>,
    pub offsets: Vec<Num>,
}

impl AffineDynamics {
    /// Builds the dynamics for coefficient `g`, requiring `A(i, g_i)` finite.
    pub fn from_matrix(a: &MaxPlusMatrix, g: Vec<usize>) -> Result<Self> {
        if g.len() != a.n() {
            return Err(Error::Dimension(format!("coefficient of length {} for n = {}", g.len(), a.n())));
        }
        let offsets = g
            .iter()
            .enumerate()
            .map(|(i, &gi)| {
                a.get(i, gi).finite().ok_or_else(|| {
                    Error::Internal(format!("A({}, {}) is ε; not an admissible coefficient", i + 1, gi + 1))
                })
            })
            .collect::<Result<_>>()?;
        Ok(AffineDynamics { g, offsets })
    }

    pub fn identity(n: usize) -> Self {
        AffineDynamics { g: (0..n).collect(), offsets: vec![Num::ZERO; n] }
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn apply(&self, x: &[Num]) -> Vec<Num> {
        self.g.iter().zip(&self.offsets).map(|(&gi, &o)| x[gi] + o).collect()
    }
}

impl fmt::Display for AffineDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.g.iter().map(|g| (g + 1).to_string()).collect();
        write!(f, "g=({})", g.join(","))
    }
}

/// Canonical, non-empty difference-bound matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    n: usize,
    b: Vec<Bound>,
}

impl Dbm {
    /// The whole space `R^n`.
    pub fn universe(n: usize) -> Self {
        let mut b = vec![Bound::Infinite; n * n];
        for i in 0..n {
            b[i * n + i] = Bound::ZERO;
        }
        Dbm { n, b }
    }

    pub fn from_constraints(n: usize, constraints: &[Constraint]) -> Option<Self> {
        let mut raw = Dbm::universe(n).b;
        for c in constraints {
            let cell = &mut raw[c.i * n + c.j];
            *cell = (*cell).min(c.bound);
        }
        Dbm::from_bounds(n, raw)
    }

    /// Canonicalises an arbitrary bound matrix (row-major, `n × n`) by
    /// shortest-path closure. `None` when the constraints are inconsistent.
    pub fn from_bounds(n: usize, mut b: Vec<Bound>) -> Option<Self> {
        assert_eq!(b.len(), n * n, "bound matrix must be n x n");
        for i in 0..n {
            let d = &mut b[i * n + i];
            *d = (*d).min(Bound::ZERO);
        }
        for k in 0..n {
            for i in 0..n {
                let bik = b[i * n + k];
                if bik == Bound::Infinite {
                    continue;
                }
                for j in 0..n {
                    let via = bik + b[k * n + j];
                    if via < b[i * n + j] {
                        b[i * n + j] = via;
                    }
                }
            }
            if (0..n).any(|i| b[i * n + i] < Bound::ZERO) {
                return None;
            }
        }
        Some(Dbm { n, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self, i: usize, j: usize) -> Bound {
        self.b[i * self.n + j]
    }

    /// Already canonical; kept for symmetry with [`Dbm::from_bounds`].
    pub fn canonicalize(&self) -> Option<Dbm> {
        Dbm::from_bounds(self.n, self.b.clone())
    }

    pub fn is_universe(&self) -> bool {
        *self == Dbm::universe(self.n)
    }

    /// Adds one constraint with an incremental `O(n²)` closure.
    pub fn constrain(&self, c: Constraint) -> Option<Dbm> {
        let n = self.n;
        if c.bound >= self.bound(c.i, c.j) {
            return Some(self.clone());
        }
        if self.bound(c.j, c.i) + c.bound < Bound::ZERO {
            return None;
        }
        let mut b = self.b.clone();
        for a in 0..n {
            let to_i = self.bound(a, c.i);
            if to_i == Bound::Infinite {
                continue;
            }
            let head = to_i + c.bound;
            for z in 0..n {
                let via = head + self.bound(c.j, z);
                if via < b[a * n + z] {
                    b[a * n + z] = via;
                }
            }
        }
        Some(Dbm { n, b })
    }

    pub fn intersect(&self, other: &Dbm) -> Option<Dbm> {
        assert_eq!(self.n, other.n, "intersecting DBMs of different dimension");
        let b = self.b.iter().zip(&other.b).map(|(x, y)| (*x).min(*y)).collect();
        Dbm::from_bounds(self.n, b)
    }

    pub fn intersects(&self, other: &Dbm) -> bool {
        self.intersect(other).is_some()
    }

    /// Set inclusion (both operands canonical).
    pub fn is_subset_of(&self, other: &Dbm) -> bool {
        self.b.iter().zip(&other.b).all(|(x, y)| x <= y)
    }

    pub fn contains(&self, x: &[Num]) -> bool {
        assert_eq!(x.len(), self.n, "point dimension");
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.bound(i, j).admits(x[i] - x[j])))
    }

    /// Image under `x'_i = x_{g_i} + o_i`: the bound on `x'_i - x'_j` is the
    /// bound on `x_{g_i} - x_{g_j}` shifted by `o_i - o_j`. Canonical input
    /// gives canonical output.
    pub fn image(&self, dynamics: &AffineDynamics) -> Dbm {
        let n = self.n;
        assert_eq!(dynamics.n(), n, "dynamics dimension");
        let mut b = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let shift = dynamics.offsets[i] - dynamics.offsets[j];
                b.push(self.bound(dynamics.g[i], dynamics.g[j]) + Bound::le(shift));
            }
        }
        Dbm::from_bounds(n, b).expect("image of a non-empty set is non-empty")
    }

    /// Points whose successor under `dynamics` lies in `self`.
    pub fn preimage(&self, dynamics: &AffineDynamics) -> Option<Dbm> {
        let n = self.n;
        assert_eq!(dynamics.n(), n, "dynamics dimension");
        let mut raw = Dbm::universe(n).b;
        for i in 0..n {
            for j in 0..n {
                let Bound::Finite { value, strict } = self.bound(i, j) else { continue };
                if i == j {
                    continue;
                }
                // x_{g_i} - x_{g_j} ≤ value - (o_i - o_j)
                let rhs = Bound::Finite { value: value - (dynamics.offsets[i] - dynamics.offsets[j]), strict };
                let (gi, gj) = (dynamics.g[i], dynamics.g[j]);
                if gi == gj {
                    if !rhs.admits(Num::ZERO) {
                        return None;
                    }
                } else {
                    let cell = &mut raw[gi * n + gj];
                    *cell = (*cell).min(rhs);
                }
            }
        }
        Dbm::from_bounds(n, raw)
    }

    /// Finite off-diagonal constraints.
    pub fn constraints(&self) -> impl Iterator<Item = Constraint> + '_ {
        (0..self.n).flat_map(move |i| {
            (0..self.n).filter_map(move |j| {
                let bound = self.bound(i, j);
                (i != j && bound != Bound::Infinite).then_some(Constraint { i, j, bound })
            })
        })
    }

    /// One constraint per line, `x<i> - x<j> <op> <c>`.
    pub fn dump(&self) -> String {
        self.constraints().map(|c| format!("{c}\n")).collect()
    }

    pub fn parse_dump(n: usize, text: &str) -> Result<Option<Dbm>> {
        let mut cs = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            cs.extend(Constraint::parse(line, n)?);
        }
        Ok(Dbm::from_constraints(n, &cs))
    }

    /// A deterministic interior-ish point, with the last coordinate pinned to 0.
    pub fn some_point(&self) -> Option<Vec<Num>> {
        self.build_point(pick_deterministic)
    }

    /// A random point of the set. Unbounded directions are clipped to
    /// `window` around the already-fixed coordinates; the last coordinate is
    /// pinned to 0 since every set here is shift invariant.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, window: Num) -> Option<Vec<Num>> {
        self.build_point(|lo, hi| pick_random(rng, lo, hi, window))
    }

    fn build_point(
        &self,
        mut pick: impl FnMut(Option<(Num, bool)>, Option<(Num, bool)>) -> Option<Num>,
    ) -> Option<Vec<Num>> {
        let n = self.n;
        let mut x: Vec<Option<Num>> = vec![None; n];
        x[n - 1] = Some(Num::ZERO);
        for v in 0..n - 1 {
            let mut lo: Option<(Num, bool)> = None;
            let mut hi: Option<(Num, bool)> = None;
            for (u, xu) in x.iter().enumerate() {
                let Some(xu) = *xu else { continue };
                // x_u - x_v ≤ b(u,v)  =>  x_v ≥ x_u - b(u,v)
                if let Bound::Finite { value, strict } = self.bound(u, v) {
                    let cand = (xu - value, strict);
                    if lo.is_none_or(|l| tighter_lower(cand, l)) {
                        lo = Some(cand);
                    }
                }
                // x_v - x_u ≤ b(v,u)  =>  x_v ≤ x_u + b(v,u)
                if let Bound::Finite { value, strict } = self.bound(v, u) {
                    let cand = (xu + value, strict);
                    if hi.is_none_or(|h| tighter_upper(cand, h)) {
                        hi = Some(cand);
                    }
                }
            }
            x[v] = Some(pick(lo, hi)?);
        }
        let point: Vec<Num> = x.into_iter().map(|v| v.expect("assigned")).collect();
        self.contains(&point).then_some(point)
    }
}

fn tighter_lower(a: (Num, bool), b: (Num, bool)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 && !b.1)
}

fn tighter_upper(a: (Num, bool), b: (Num, bool)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1)
}

/// Smallest and largest admissible tick for an interval.
fn tick_range(lo: Option<(Num, bool)>, hi: Option<(Num, bool)>) -> (Option<i64>, Option<i64>) {
    let l = lo.map(|(v, s)| v.ticks() + i64::from(s));
    let h = hi.map(|(v, s)| v.ticks() - i64::from(s));
    (l, h)
}

fn pick_deterministic(lo: Option<(Num, bool)>, hi: Option<(Num, bool)>) -> Option<Num> {
    const UNIT: i64 = crate::num::SCALE;
    let t = match tick_range(lo, hi) {
        (Some(l), Some(h)) if l > h => return None,
        (Some(l), Some(h)) => l + (h - l) / 2,
        (Some(_), None) => lo.unwrap().0.ticks() + UNIT,
        (None, Some(_)) => hi.unwrap().0.ticks() - UNIT,
        (None, None) => 0,
    };
    Some(Num::from_ticks(t))
}

fn pick_random<R: Rng + ?Sized>(
    rng: &mut R,
    lo: Option<(Num, bool)>,
    hi: Option<(Num, bool)>,
    window: Num,
) -> Option<Num> {
    let w = window.ticks().max(1);
    let (l, h) = match tick_range(lo, hi) {
        (Some(l), Some(h)) => (l, h),
        (Some(l), None) => (l, l + w),
        (None, Some(h)) => (h - w, h),
        (None, None) => (-w, w),
    };
    if l > h {
        return None;
    }
    Some(Num::from_ticks(rng.gen_range(l..=h)))
}

impl fmt::Display for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.constraints().map(|c| c.to_string()).collect();
        if parts.is_empty() { f.write_str("true") } else { f.write_str(&parts.join(" && ")) }
    }
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dbm{{{self}}}")
    }
}
