use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result, bail};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mplverify::abstraction::{AbstractTransitionSystem, PredicateSet};
use mplverify::bmc::{self, Outcome, TraceEvent, VerifyOptions, VerifyRun};
use mplverify::harness::{
    BenchmarkConfig, Model, bench_abstraction, bench_ct, load_model, random_irreducible, random_mpl, save_model,
    seed_from_env,
};
use mplverify::spec::{DirectVerdict, direct_check};
use mplverify::{Exec, LtlFormula, parse};

const EXIT_HOLDS: u8 = 0;
const EXIT_VIOLATED: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "mplverify", version, about = "Abstraction-based bounded model checking of max-plus linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a time-difference LTL formula against a model.
    Verify(VerifyArgs),
    /// Build and print the abstract transition system.
    Abstract(AbstractArgs),
    /// Eigenvalue, transient, cyclicity and completeness threshold.
    Ct(CtArgs),
    /// Try to decide a formula from the matrix alone.
    Direct(DirectArgs),
    /// Generate a random model file.
    Random(RandomArgs),
    /// Run a benchmark campaign.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct ModelArgs {
    /// Model file (JSON).
    #[arg(short, long, value_name = "FILE")]
    model: PathBuf,
    /// Formula; overrides the `spec` field of the model.
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: ModelArgs,
    /// Print the verdict as JSON.
    #[arg(long)]
    json: bool,
    /// Print the search trace, witness sets and concrete run.
    #[arg(long)]
    explain: bool,
    /// Unrolling cap of the lasso spuriousness check.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Maximum number of refinements before giving up.
    #[arg(long, default_value_t = 1000)]
    max_refinements: usize,
    /// Disable data parallelism.
    #[arg(long)]
    sequential: bool,
    /// Always go through the abstraction, even if the formula is decided by the matrix.
    #[arg(long)]
    no_direct: bool,
}

#[derive(Args)]
struct AbstractArgs {
    #[arg(short, long, value_name = "FILE")]
    model: PathBuf,
    /// Add the predicates of this formula's atoms.
    #[arg(long)]
    spec: Option<String>,
    /// Plain-text listing (default).
    #[arg(long, conflicts_with = "json")]
    dump: bool,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct CtArgs {
    #[arg(short, long, value_name = "FILE")]
    model: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DirectArgs {
    #[command(flatten)]
    input: ModelArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RandomArgs {
    /// Dimension.
    #[arg(short, long)]
    n: usize,
    /// Finite entries per row.
    #[arg(long, default_value_t = 2)]
    finite: usize,
    #[arg(long, default_value_t = 1)]
    lo: i64,
    #[arg(long, default_value_t = 10)]
    hi: i64,
    /// Defaults to $MPLVERIFY_SEED, else 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Resample until the matrix is irreducible.
    #[arg(long)]
    irreducible: bool,
    #[arg(long)]
    spec: Option<String>,
    /// Write here instead of stdout.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CampaignArgs {
    /// Dimensions, as a list `3,5,7` or an inclusive range `3..8`.
    #[arg(long, default_value = "3..8", value_parser = parse_dims)]
    dims: Dims,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    finite: usize,
    #[arg(long, default_value_t = 1)]
    lo: i64,
    #[arg(long, default_value_t = 10)]
    hi: i64,
    /// Defaults to $MPLVERIFY_SEED, else 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-trial rows as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

impl CampaignArgs {
    fn config(&self) -> BenchmarkConfig {
        BenchmarkConfig {
            dims: self.dims.0.clone(),
            finite_per_row: self.finite,
            value_range: (self.lo, self.hi),
            trials: self.trials,
            seed: self.seed.unwrap_or_else(|| seed_from_env(0)),
        }
    }

    fn exec(&self) -> Exec {
        exec_for(self.sequential)
    }
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Time the matrix-only abstraction.
    Abstraction(CampaignArgs),
    /// Compare empirical completeness thresholds with k0 + c.
    Ct {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[arg(long, default_value = "F G (t1 <= 10)")]
        spec: String,
    },
}

#[derive(Clone, Debug)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let bad = |_| format!("invalid dimension list `{s}`");
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(bad)?;
        let hi: usize = hi.trim().parse().map_err(bad)?;
        if lo > hi {
            return Err(format!("empty range `{s}`"));
        }
        return Ok(Dims((lo..=hi).collect()));
    }
    s.split(',').map(|d| d.trim().parse().map_err(bad)).collect::<std::result::Result<_, _>>().map(Dims)
}

fn exec_for(sequential: bool) -> Exec {
    if sequential { Exec::Sequential } else { Exec::default() }
}

fn load(path: &Path) -> Result<Model> {
    load_model(path).with_context(|| format!("cannot load model {}", path.display()))
}

fn formula_for(model: &Model, spec: Option<&str>) -> Result<LtlFormula> {
    let text = match spec.or(model.spec.as_deref()) {
        Some(t) => t,
        None => bail!("no formula: pass --spec or add a `spec` field to the model"),
    };
    let f = parse(text).with_context(|| format!("cannot parse formula `{text}`"))?;
    f.check_indices(model.matrix.n())?;
    Ok(f)
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Holds => EXIT_HOLDS,
        Outcome::Violated => EXIT_VIOLATED,
        Outcome::Undecided => EXIT_UNDECIDED,
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let model = load(&args.input.model)?;
    let formula = formula_for(&model, args.input.spec.as_deref())?;
    let opts = VerifyOptions {
        max_iter: args.max_iter,
        max_refinements: args.max_refinements,
        exec: exec_for(args.sequential),
        skip_direct: args.no_direct,
        ..VerifyOptions::default()
    };
    let run = bmc::verify_detailed(&model.matrix, model.initial.clone(), &formula, &opts)?;
    let v = &run.verdict;
    if args.json {
        println!("{}", serde_json::to_string_pretty(v)?);
    } else {
        println!("{}: {}", v.outcome, v.reason);
        if args.explain {
            explain(&run, &formula);
        }
    }
    Ok(outcome_code(v.outcome))
}

fn explain(run: &VerifyRun, formula: &LtlFormula) {
    let v = &run.verdict;
    println!("formula: {formula}");
    if let Some(p) = &v.spectrum {
        println!("lambda = {}, k0 = {}, c = {}, CT = {}", p.lambda_string(), p.transient, p.cyclicity, p.threshold());
    }
    if let Some(ts) = &run.abstraction {
        println!("abstraction: {} states, {} edges, {} predicates", ts.len(), ts.edge_count(), ts.predicates().len());
    }
    for e in &v.trace {
        match e {
            TraceEvent::Bound { k } => println!("k = {k}"),
            TraceEvent::Candidate { path, .. } => println!("  candidate {path}"),
            TraceEvent::Spurious { pivot, witnesses, .. } => {
                println!("    spurious at {pivot}");
                for (t, w) in witnesses.iter().enumerate() {
                    println!("      D{t}: {w}");
                }
            }
            TraceEvent::Refined { pivot, into } => println!("    refined {pivot} into {}", into.join(", ")),
            TraceEvent::Real { .. } => println!("    real"),
            TraceEvent::Undecided { iterations, .. } => println!("    undecided after {iterations} unrollings"),
        }
    }
    let Some(cex) = &v.counterexample else { return };
    println!("counterexample: {}", cex.names);
    for (t, w) in cex.witnesses.iter().enumerate() {
        println!("  D{t}: {w}");
    }
    let (Some(r), Some(ts)) = (&cex.run, &run.abstraction) else { return };
    println!("concrete run:");
    for (k, x) in r.trajectory.iter().enumerate() {
        let xs: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        let name = r.states.get(k).map_or("", |&s| ts.state(s).name.as_str());
        let mark = if r.loop_start == Some(k) { "  <- loop" } else { "" };
        println!("  x({k}) = ({}) {name}{mark}", xs.join(", "));
    }
}

fn cmd_abstract(args: &AbstractArgs) -> Result<u8> {
    let model = load(&args.model)?;
    let a = &model.matrix;
    let set = match &args.spec {
        Some(text) => {
            let f = parse(text).with_context(|| format!("cannot parse formula `{text}`"))?;
            PredicateSet::for_atoms(a, &f.distinct_atoms())?
        }
        None => PredicateSet::from_matrix(a)?,
    };
    let ts = AbstractTransitionSystem::build(a, set, model.initial.clone(), exec_for(args.sequential))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&ts.to_json())?);
    } else {
        print!("{}", ts.dump());
    }
    Ok(EXIT_HOLDS)
}

fn cmd_ct(args: &CtArgs) -> Result<u8> {
    let model = load(&args.model)?;
    let profile = bmc::completeness_threshold(&model.matrix, Default::default())?;
    match (profile, args.json) {
        (Some(p), true) => println!("{}", serde_json::to_string_pretty(&p)?),
        (Some(p), false) => {
            println!("lambda = {}", p.lambda_string());
            println!("k0 = {}", p.transient);
            println!("c = {}", p.cyclicity);
            println!("CT = {}", p.threshold());
        }
        (None, true) => println!("{}", json!({ "reducible": true })),
        (None, false) => {
            println!("matrix is reducible: no transient bound, verify falls back to the abstraction size")
        }
    }
    Ok(EXIT_HOLDS)
}

fn cmd_direct(args: &DirectArgs) -> Result<u8> {
    let model = load(&args.input.model)?;
    let formula = formula_for(&model, args.input.spec.as_deref())?;
    let report = direct_check(&model.matrix, &formula)?;
    let reason = report.reason.map(|r| r.to_string());
    if args.json {
        let constants: Vec<_> =
            report.constants.iter().map(|(p, c)| json!({ "atom": p.to_string(), "value": c })).collect();
        let out = json!({
            "verdict": report.verdict,
            "reason": reason,
            "residual": report.residual.to_string(),
            "constants": constants,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        for (p, c) in &report.constants {
            println!("{p} is always {c}");
        }
        match reason {
            Some(r) => println!("{}: {r}", json!(report.verdict).as_str().unwrap_or_default()),
            None => println!("inconclusive, residual formula: {}", report.residual),
        }
    }
    Ok(match report.verdict {
        DirectVerdict::Holds => EXIT_HOLDS,
        DirectVerdict::Violated => EXIT_VIOLATED,
        DirectVerdict::Inconclusive => EXIT_UNDECIDED,
    })
}

fn cmd_random(args: &RandomArgs) -> Result<u8> {
    let cfg = BenchmarkConfig {
        dims: vec![args.n],
        finite_per_row: args.finite,
        value_range: (args.lo, args.hi),
        trials: 1,
        seed: args.seed.unwrap_or_else(|| seed_from_env(0)),
    };
    cfg.validate()?;
    let matrix = if args.irreducible {
        random_irreducible(args.n, args.finite, cfg.value_range, cfg.seed).0
    } else {
        random_mpl(args.n, args.finite, cfg.value_range, cfg.seed)
    };
    let model = Model { matrix, initial: None, spec: args.spec.clone() };
    match &args.output {
        Some(path) => save_model(path, &model).with_context(|| format!("cannot write {}", path.display()))?,
        None => println!("{}", model.to_json()),
    }
    Ok(EXIT_HOLDS)
}

fn csv_sink(path: &Option<PathBuf>) -> Result<Option<File>> {
    path.as_ref().map(|p| File::create(p).with_context(|| format!("cannot create {}", p.display()))).transpose()
}

fn cmd_bench(cmd: &BenchCommand) -> Result<u8> {
    match cmd {
        BenchCommand::Abstraction(c) => {
            let report = bench_abstraction(&c.config(), c.exec())?;
            print!("{}", report.table());
            if let Some(f) = csv_sink(&c.csv)? {
                report.write_csv(f)?;
            }
        }
        BenchCommand::Ct { campaign: c, spec } => {
            let formula = parse(spec).with_context(|| format!("cannot parse formula `{spec}`"))?;
            let opts = VerifyOptions { exec: c.exec(), ..VerifyOptions::default() };
            let report = bench_ct(&c.config(), &formula, &opts)?;
            let mut out = io::stdout().lock();
            report.write_csv(&mut out)?;
            let (below, equal, above) = report.counts();
            writeln!(out, "ct_empirical < ct_lemma: {below}")?;
            writeln!(out, "ct_empirical = ct_lemma: {equal}")?;
            writeln!(out, "ct_empirical > ct_lemma: {above}")?;
            if let Some(f) = csv_sink(&c.csv)? {
                report.write_csv(f)?;
            }
        }
    }
    Ok(EXIT_HOLDS)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Abstract(a) => cmd_abstract(a),
        Command::Ct(a) => cmd_ct(a),
        Command::Direct(a) => cmd_direct(a),
        Command::Random(a) => cmd_random(a),
        Command::Bench(b) => cmd_bench(b),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_HOLDS });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
