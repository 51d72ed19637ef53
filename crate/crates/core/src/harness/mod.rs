//! Model files, random systems and benchmark campaigns.

mod bench;
mod model;
mod random;

pub use bench::{
    AbstractionReport, CtReport, CtRow, PHASES, TimingRow, TimingSummary, bench_abstraction, bench_ct,
    empirical_threshold,
};
pub use model::{Model, load_model, save_model};
pub use random::{BenchmarkConfig, random_irreducible, random_mpl, trial_seed};

/// Environment variable overriding the default campaign seed.
pub const SEED_ENV: &str = "MPLVERIFY_SEED";

/// `MPLVERIFY_SEED` if set and numeric, else `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}
