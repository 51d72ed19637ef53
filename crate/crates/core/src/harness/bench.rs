use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::abstraction::{AbstractTransitionSystem, PredicateSet, affine_dynamics_for_state, generate_abstract_states};
use crate::bmc::{self, Outcome, VerifyOptions};
use crate::error::Result;
use crate::par::Exec;
use crate::spec::LtlFormula;

use super::random::{BenchmarkConfig, random_irreducible, random_mpl, trial_seed};

pub const PHASES: [&str; 4] = ["predicates", "states", "dynamics", "total"];

#[derive(Clone, Debug, Serialize)]
pub struct TimingRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub phase: &'static str,
    pub micros: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingSummary {
    pub n: usize,
    pub trials: usize,
    pub avg_ms: f64,
    pub max_ms: f64,
    pub avg_states: f64,
}

#[derive(Clone, Debug, Default)]
pub struct AbstractionReport {
    pub rows: Vec<TimingRow>,
    /// Abstract state count per (n, trial).
    pub states: Vec<(usize, usize, usize)>,
}

impl AbstractionReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record(["n", "trial", "seed", "phase", "micros"])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Average and maximum of the total time per dimension.
    pub fn summary(&self) -> Vec<TimingSummary> {
        let mut dims: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        dims.dedup();
        dims.into_iter()
            .map(|n| {
                let totals: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.n == n && r.phase == "total")
                    .map(|r| r.micros as f64 / 1000.0)
                    .collect();
                let counts: Vec<f64> = self.states.iter().filter(|s| s.0 == n).map(|s| s.2 as f64).collect();
                TimingSummary {
                    n,
                    trials: totals.len(),
                    avg_ms: totals.iter().sum::<f64>() / totals.len() as f64,
                    max_ms: totals.iter().cloned().fold(0.0, f64::max),
                    avg_states: counts.iter().sum::<f64>() / counts.len().max(1) as f64,
                }
            })
            .collect()
    }

    pub fn table(&self) -> String {
        let mut out =
            format!("{:>4} {:>7} {:>12} {:>12} {:>11}\n", "n", "trials", "avg (ms)", "max (ms)", "avg states");
        for s in self.summary() {
            out +=
                &format!("{:>4} {:>7} {:>12.3} {:>12.3} {:>11.1}\n", s.n, s.trials, s.avg_ms, s.max_ms, s.avg_states);
        }
        out
    }
}

/// Times the formula-free abstraction (matrix predicates, cells,
/// dynamics) on random systems. Trials run one after the other so the
/// timings do not compete; `exec` applies inside each trial.
pub fn bench_abstraction(cfg: &BenchmarkConfig, exec: Exec) -> Result<AbstractionReport> {
    cfg.validate()?;
    let mut report = AbstractionReport::default();
    for &n in &cfg.dims {
        for trial in 0..cfg.trials {
            let seed = trial_seed(cfg.seed, n, trial);
            let a = random_mpl(n, cfg.finite_per_row, cfg.value_range, seed);
            let start = Instant::now();
            let set = PredicateSet::from_matrix(&a)?;
            let t_pred = start.elapsed();
            let cells = generate_abstract_states(n, set.predicates(), exec);
            let t_states = start.elapsed();
            let dynamics = exec.map(&cells, |(v, _)| affine_dynamics_for_state(&a, &set, v));
            let t_total = start.elapsed();
            for d in dynamics {
                d?;
            }
            let phases = [t_pred, t_states - t_pred, t_total - t_states, t_total];
            for (phase, t) in PHASES.into_iter().zip(phases) {
                report.rows.push(TimingRow { n, trial, seed, phase, micros: t.as_micros() });
            }
            report.states.push((n, trial, cells.len()));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CtRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub ct_empirical: usize,
    pub ct_lemma: usize,
    pub verdict: Outcome,
}

#[derive(Clone, Debug, Default)]
pub struct CtReport {
    pub rows: Vec<CtRow>,
}

impl CtReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record(["n", "trial", "seed", "ct_empirical", "ct_lemma", "verdict"])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Trials with the empirical threshold below, equal to, and above `k0 + c`.
    pub fn counts(&self) -> (usize, usize, usize) {
        let below = self.rows.iter().filter(|r| r.ct_empirical < r.ct_lemma).count();
        let equal = self.rows.iter().filter(|r| r.ct_empirical == r.ct_lemma).count();
        (below, equal, self.rows.len() - below - equal)
    }
}

/// Empirical completeness threshold of one system: the longest no-loop path
/// of the final abstraction that some concrete run realizes.
pub fn empirical_threshold(run: &bmc::VerifyRun, a: &crate::MaxPlusMatrix, formula: &LtlFormula) -> Result<usize> {
    let ts = match &run.abstraction {
        Some(ts) => ts.clone(),
        None => {
            let set = PredicateSet::for_atoms(a, &formula.distinct_atoms())?;
            AbstractTransitionSystem::build(a, set, None, Exec::Sequential)?
        }
    };
    Ok(bmc::longest_real_noloop(&ts))
}

/// Compares the empirical threshold with `k0 + c` on random irreducible
/// systems. Trials are independent and merged by index.
pub fn bench_ct(cfg: &BenchmarkConfig, formula: &LtlFormula, opts: &VerifyOptions) -> Result<CtReport> {
    cfg.validate()?;
    let inner = VerifyOptions { exec: Exec::Sequential, ..*opts };
    let mut rows = Vec::new();
    for &n in &cfg.dims {
        formula.check_indices(n)?;
        let trials = opts.exec.map_range(0..cfg.trials, |trial| -> Result<CtRow> {
            let (a, seed) = random_irreducible(n, cfg.finite_per_row, cfg.value_range, trial_seed(cfg.seed, n, trial));
            let run = bmc::verify_detailed(&a, None, formula, &inner)?;
            let ct_lemma = run.verdict.spectrum.map(|p| p.threshold()).expect("irreducible");
            let ct_empirical = empirical_threshold(&run, &a, formula)?;
            Ok(CtRow { n, trial, seed, ct_empirical, ct_lemma, verdict: run.verdict.outcome })
        });
        for r in trials {
            rows.push(r?);
        }
    }
    Ok(CtReport { rows })
}
