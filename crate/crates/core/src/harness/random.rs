use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::maxplus::{Epsilon, MaxPlusMatrix, MpScalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchmarkConfig {
    pub dims: Vec<usize>,
    /// Finite entries per row.
    pub finite_per_row: usize,
    /// Inclusive integer range of the finite entries.
    pub value_range: (i64, i64),
    pub trials: usize,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig { dims: vec![3], finite_per_row: 2, value_range: (1, 10), trials: 10, seed: 0 }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.value_range;
        if lo > hi {
            return Err(Error::Dimension(format!("empty value range [{lo}, {hi}]")));
        }
        if let Some(&n) = self.dims.iter().find(|&&n| n < self.finite_per_row || n == 0) {
            return Err(Error::Dimension(format!("{} finite entries per row do not fit n = {n}", self.finite_per_row)));
        }
        if self.finite_per_row == 0 {
            return Err(Error::Dimension("rows need at least one finite entry".into()));
        }
        Ok(())
    }
}

/// Row by row: `m` distinct columns chosen uniformly receive uniform
/// integers from `range`; the rest is ε.
pub fn random_mpl(n: usize, m: usize, range: (i64, i64), seed: u64) -> MaxPlusMatrix {
    assert!(m >= 1 && m <= n, "need 1 <= m <= n");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let mut row = vec![Epsilon; n];
            let mut cols = sample(&mut rng, n, m).into_vec();
            cols.sort_unstable();
            for j in cols {
                row[j] = MpScalar::int(rng.gen_range(range.0..=range.1));
            }
            row
        })
        .collect();
    MaxPlusMatrix::from_rows(rows).expect("square by construction")
}

/// Seed of one trial, mixed from the campaign seed, dimension and index.
pub fn trial_seed(base: u64, n: usize, trial: usize) -> u64 {
    let mut z =
        base ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws until the matrix is irreducible, returning it and the seed used.
pub fn random_irreducible(n: usize, m: usize, range: (i64, i64), seed: u64) -> (MaxPlusMatrix, u64) {
    let mut s = seed;
    loop {
        let a = random_mpl(n, m, range, s);
        if a.is_irreducible() {
            return (a, s);
        }
        s = trial_seed(s, n, 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(random_mpl(3, 2, (1, 10), 7), random_mpl(3, 2, (1, 10), 7));
        assert_ne!(random_mpl(6, 2, (1, 10), 7), random_mpl(6, 2, (1, 10), 8));
    }

    #[test]
    fn finite_count_and_range() {
        let a = random_mpl(5, 2, (1, 10), 1);
        assert_eq!(a.finite_count(), 10);
        for r in a.rows() {
            assert_eq!(r.iter().filter(|v| v.is_finite()).count(), 2);
            for v in r.iter().filter_map(|v| v.finite()) {
                assert!(v.is_integer() && (1..=10).contains(&(v.ticks() / crate::num::SCALE)));
            }
        }
    }

    #[test]
    fn full_rows_are_irreducible() {
        assert!(random_mpl(3, 3, (1, 10), 3).is_irreducible());
    }

    #[test]
    fn irreducible_resampling() {
        let (a, _) = random_irreducible(4, 2, (1, 10), 11);
        assert!(a.is_irreducible());
    }

    #[test]
    fn config_validation() {
        assert!(BenchmarkConfig::default().validate().is_ok());
        let bad = BenchmarkConfig { dims: vec![1], ..BenchmarkConfig::default() };
        assert!(bad.validate().is_err());
        let bad = BenchmarkConfig { value_range: (3, 1), ..BenchmarkConfig::default() };
        assert!(bad.validate().is_err());
    }
}
