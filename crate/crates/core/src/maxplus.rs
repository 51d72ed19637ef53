//! Max-plus semiring scalars and square matrices, with the spectral data
//! (eigenvalue, transient, cyclicity) of irreducible matrices.

use std::collections::VecDeque;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Num;

/// An element of `R ∪ {ε}`. `Epsilon` orders below every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MpScalar {
    Epsilon,
    Finite(Num),
}

pub use MpScalar::{Epsilon, Finite};

impl MpScalar {
    pub fn int(v: i64) -> Self {
        Finite(Num::from_int(v))
    }

    pub fn finite(self) -> Option<Num> {
        match self {
            Finite(v) => Some(v),
            Epsilon => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    /// `a ⊕ b = max(a, b)`
    pub fn oplus(self, rhs: Self) -> Self {
        self.max(rhs)
    }

    /// `a ⊗ b = a + b`, with ε absorbing.
    pub fn otimes(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => Epsilon,
        }
    }
}

impl From<Option<Num>> for MpScalar {
    fn from(v: Option<Num>) -> Self {
        v.map_or(Epsilon, Finite)
    }
}

impl fmt::Display for MpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(v) => write!(f, "{v}"),
            Epsilon => f.write_str("ε"),
        }
    }
}

/// Square matrix over the max-plus semiring, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MaxPlusMatrix {
    n: usize,
    entries: Vec<MpScalar>,
}

impl MaxPlusMatrix {
    pub fn from_rows(rows: Vec<Vec<MpScalar>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dimension("matrix has no rows".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            entries.extend(row);
        }
        Ok(MaxPlusMatrix { n, entries })
    }

    /// Convenience constructor from integers, `None` standing for ε.
    pub fn from_ints<R: AsRef<[Option<i64>]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter().map(|r| r.as_ref().iter().map(|v| v.map_or(Epsilon, MpScalar::int)).collect()).collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Epsilon; n * n];
        for i in 0..n {
            entries[i * n + i] = Finite(Num::ZERO);
        }
        MaxPlusMatrix { n, entries }
    }

    pub fn epsilon(n: usize) -> Self {
        MaxPlusMatrix { n, entries: vec![Epsilon; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> MpScalar {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: MpScalar) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[MpScalar] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[MpScalar]> {
        self.entries.chunks(self.n)
    }

    /// Column indices of the finite entries of row `i`, increasing.
    pub fn finite_columns(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(i, j).is_finite()).collect()
    }

    pub fn finite_count(&self) -> usize {
        self.entries.iter().filter(|v| v.is_finite()).count()
    }

    pub fn is_regular(&self) -> bool {
        self.check_regular().is_ok()
    }

    pub fn check_regular(&self) -> Result<()> {
        match self.rows().position(|r| r.iter().all(|v| !v.is_finite())) {
            Some(row) => Err(Error::NotRegular { row: row + 1 }),
            None => Ok(()),
        }
    }

    pub fn multiply(&self, rhs: &MaxPlusMatrix) -> Result<MaxPlusMatrix> {
        if self.n != rhs.n {
            return Err(Error::Dimension(format!("{0}x{0} ⊗ {1}x{1}", self.n, rhs.n)));
        }
        let n = self.n;
        let mut entries = vec![Epsilon; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if !a.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let cell = &mut entries[i * n + j];
                    *cell = cell.oplus(a.otimes(rhs.get(k, j)));
                }
            }
        }
        Ok(MaxPlusMatrix { n, entries })
    }

    /// `A^{⊗r}`; `r = 0` yields the identity.
    pub fn power(&self, r: usize) -> MaxPlusMatrix {
        let mut acc = MaxPlusMatrix::identity(self.n);
        for _ in 0..r {
            acc = self.multiply(&acc).expect("same dimension");
        }
        acc
    }

    /// One step of the system, `A ⊗ x`.
    pub fn mat_vec(&self, x: &[Num]) -> Result<Vec<Num>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("vector of length {} for n = {}", x.len(), self.n)));
        }
        self.rows()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .zip(x)
                    .filter_map(|(a, &xj)| a.finite().map(|a| a + xj))
                    .max()
                    .ok_or(Error::NotRegular { row: i + 1 })
            })
            .collect()
    }

    /// Adds `delta` to every finite entry.
    pub fn shifted(&self, delta: Num) -> MaxPlusMatrix {
        MaxPlusMatrix { n: self.n, entries: self.entries.iter().map(|v| v.otimes(Finite(delta))).collect() }
    }

    fn equals_shifted(&self, base: &MaxPlusMatrix, delta: Num) -> bool {
        self.entries.iter().zip(&base.entries).all(|(a, b)| *a == b.otimes(Finite(delta)))
    }

    /// Whether the precedence graph (edge `j → i` when `A(i,j)` is finite)
    /// is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for (v, seen_v) in seen.iter_mut().enumerate() {
                    let w = if forward { self.get(v, u) } else { self.get(u, v) };
                    if w.is_finite() && !*seen_v {
                        *seen_v = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Maximum cycle mean of the precedence graph (Karp's algorithm), exact
    /// as a ratio of ticks.
    pub fn eigenvalue(&self) -> Result<Rational64> {
        if !self.is_irreducible() {
            return Err(Error::Reducible);
        }
        let n = self.n;
        // walks[k][v]: heaviest walk of exactly k edges from node 0 to v
        let mut walks: Vec<Vec<Option<i64>>> = vec![vec![None; n]; n + 1];
        walks[0][0] = Some(0);
        for k in 1..=n {
            for v in 0..n {
                walks[k][v] = (0..n).filter_map(|u| Some(walks[k - 1][u]? + self.get(v, u).finite()?.ticks())).max();
            }
        }
        (0..n)
            .filter_map(|v| {
                let full = walks[n][v]?;
                (0..n)
                    .filter_map(|k| {
                        let part = walks[k][v]?;
                        Some(Rational64::new(full - part, (n - k) as i64))
                    })
                    .min()
            })
            .max()
            .ok_or(Error::Reducible)
    }

    pub fn transient_cyclicity(&self) -> Result<SpectralProfile> {
        self.transient_cyclicity_with(SearchCaps::default())
    }

    /// Smallest `k0` (and at that `k0` the smallest `c`) with
    /// `A^{⊗(k0+c)} = (λc) ⊗ A^{⊗k0}`. One hit at `k` implies the identity for
    /// every larger `k`, so testing a single `k` is enough.
    pub fn transient_cyclicity_with(&self, caps: SearchCaps) -> Result<SpectralProfile> {
        let lambda = self.eigenvalue()?;
        let max_c = caps.max_cyclicity;
        // window[r] = A^{⊗(k + r)} for r in 0..=max_c
        let mut window: VecDeque<MaxPlusMatrix> = VecDeque::with_capacity(max_c + 1);
        window.push_back(self.clone());
        for _ in 0..max_c {
            let next = self.multiply(window.back().unwrap())?;
            window.push_back(next);
        }
        for k in 1..=caps.max_transient {
            for c in 1..=max_c {
                let Some(delta) = lambda_times(lambda, c) else { continue };
                if window[c].equals_shifted(&window[0], delta) {
                    return Ok(SpectralProfile { lambda, transient: k, cyclicity: c });
                }
            }
            window.pop_front();
            let next = self.multiply(window.back().unwrap())?;
            window.push_back(next);
        }
        Err(Error::CapExceeded { what: "transient", cap: caps.max_transient })
    }
}

/// `λ · c` as ticks, if it is a whole number of ticks.
pub fn lambda_times(lambda: Rational64, c: usize) -> Option<Num> {
    let scaled = lambda * Rational64::from_integer(c as i64);
    scaled.is_integer().then(|| Num::from_ticks(scaled.to_integer()))
}

/// Formats a ratio of ticks exactly: a decimal when possible, else `p/q`.
pub fn format_ticks_ratio(r: Rational64) -> String {
    if r.is_integer() {
        Num::from_ticks(r.to_integer()).to_string()
    } else {
        format!("{}/{}", Num::from_ticks(*r.numer()), r.denom())
    }
}

pub fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64 / crate::num::SCALE as f64
}

impl fmt::Display for MaxPlusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MaxPlusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.rows().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        write!(f, "MaxPlusMatrix{rows:?}")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SearchCaps {
    pub max_transient: usize,
    pub max_cyclicity: usize,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { max_transient: 5000, max_cyclicity: 64 }
    }
}

/// Eigenvalue, transient and cyclicity of an irreducible matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralProfile {
    /// In ticks; may be fractional.
    pub lambda: Rational64,
    pub transient: usize,
    pub cyclicity: usize,
}

impl SpectralProfile {
    /// Upper bound on the completeness threshold, `k0 + c`.
    pub fn threshold(&self) -> usize {
        self.transient + self.cyclicity
    }

    pub fn lambda_string(&self) -> String {
        format_ticks_ratio(self.lambda)
    }
}

#[derive(Serialize, Deserialize)]
struct SpectralJson {
    lambda: String,
    lambda_approx: f64,
    transient: usize,
    cyclicity: usize,
    threshold: usize,
}

impl Serialize for SpectralProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectralJson {
            lambda: self.lambda_string(),
            lambda_approx: ratio_to_f64(self.lambda),
            transient: self.transient,
            cyclicity: self.cyclicity,
            threshold: self.threshold(),
        }
        .serialize(s)
    }
}
