//! Acceptance checks, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are always printed; exits non-zero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mplverify::abstraction::{AbstractTransitionSystem, PredicateSet};
use mplverify::bmc::{
    self, AbstractPath, Outcome, Status, TraceEvent, VerifyOptions, concrete_violation, is_spurious_noloop,
    noloop_paths, window_len,
};
use mplverify::harness::{BenchmarkConfig, bench_abstraction, bench_ct, random_irreducible, random_mpl, trial_seed};
use mplverify::maxplus::lambda_times;
use mplverify::spec::{PropExpr, evaluate_timediff, parse, translate};
use mplverify::{AffineDynamics, Bound, Constraint, Dbm, Exec, MaxPlusMatrix, Num};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn railway() -> MaxPlusMatrix {
    MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap()
}

fn region(text: &str) -> Dbm {
    Dbm::parse_dump(2, &text.replace(';', "\n")).unwrap().unwrap()
}

fn sorted_edges(ts: &AbstractTransitionSystem) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = (0..ts.len())
        .flat_map(|i| ts.successors(i).iter().map(move |&j| (i, j)))
        .map(|(i, j)| (ts.state(i).region.to_string(), ts.state(j).region.to_string()))
        .collect();
    out.sort();
    out
}

fn expected_edges(pairs: &[(&Dbm, &Dbm)]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    out.sort();
    out
}

fn spectral() -> Check {
    let start = Instant::now();
    let p = railway().transient_cyclicity().map_err(|e| e.to_string())?;
    let got = (p.lambda, p.transient, p.cyclicity, p.threshold());
    within(start.elapsed(), Duration::from_secs(1))?;
    ensure(got == (Rational64::from_integer(4_000_000), 2, 2, 4), || format!("got {got:?}"))?;
    Ok(format!("lambda = 4, k0 = 2, c = 2 in {:.2?}", start.elapsed()))
}

fn abstraction() -> Check {
    let start = Instant::now();
    let a = railway();
    let f = parse("F (t1 <= 5)").unwrap();
    let atoms = f.distinct_atoms();
    let set = PredicateSet::for_atoms(&a, &atoms).map_err(|e| e.to_string())?;
    let shown: Vec<String> = set.predicates().iter().map(|p| p.to_string()).collect();
    ensure(shown == ["(1, 2, 3, 1)", "(1, 2, 0, 1)"], || format!("predicates {shown:?}"))?;
    ensure(set.matrix_count() == 2, || "matrix predicates".into())?;
    let time: Vec<String> =
        set.atom_predicates(&atoms[0]).unwrap().iter().map(|&i| set.predicates()[i].to_string()).collect();
    ensure(time == ["(1, 2, 0, 1)"], || format!("atom predicates {time:?}"))?;

    let ts = AbstractTransitionSystem::build(&a, set, None, Exec::Sequential).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    let (s0, s1, s2) = (region("x1 - x2 < 0"), region("x1 - x2 >= 0; x1 - x2 < 3"), region("x1 - x2 >= 3"));
    let regions: Vec<&Dbm> = ts.states().iter().map(|s| &s.region).collect();
    ensure(regions == [&s0, &s1, &s2], || format!("regions {regions:?}"))?;
    let labels: Vec<Vec<usize>> = ts.states().iter().map(|s| s.labels().collect()).collect();
    ensure(labels == [vec![], vec![1], vec![0, 1]], || format!("labels {labels:?}"))?;
    let gs: Vec<String> = ts.states().iter().map(|s| s.dynamics.to_string()).collect();
    ensure(gs == ["g=(2,2)", "g=(2,1)", "g=(1,1)"], || format!("dynamics {gs:?}"))?;
    let want = expected_edges(&[(&s0, &s1), (&s1, &s0), (&s1, &s1), (&s2, &s0)]);
    ensure(sorted_edges(&ts) == want, || format!("edges {:?}", sorted_edges(&ts)))?;
    Ok(format!("3 states, 4 edges in {:.2?}", start.elapsed()))
}

/// `F G p` holds on a finite abstraction with every state initial iff every
/// state on some cycle satisfies `p`.
fn eventually_always_oracle(ts: &AbstractTransitionSystem, atom: &PropExpr) -> bool {
    let n = ts.len();
    let reaches = |from: usize, to: usize| {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = ts.successors(from).to_vec();
        while let Some(s) = stack.pop() {
            if s == to {
                return true;
            }
            if !std::mem::replace(&mut seen[s], true) {
                stack.extend_from_slice(ts.successors(s));
            }
        }
        false
    };
    (0..n).filter(|&s| reaches(s, s)).all(|s| atom.eval(&ts.state(s).valuation))
}

fn verification() -> Check {
    let a = railway();
    let opts = VerifyOptions::default();
    let ev = bmc::verify(&a, None, &parse("F (t1 <= 5)").unwrap(), &opts).map_err(|e| e.to_string())?;
    ensure(ev.outcome == Outcome::Holds && ev.stats.refinements == 0, || format!("F: {} {}", ev.outcome, ev.reason))?;

    let f = parse("F G (t1 <= 5)").unwrap();
    let mut traces = Vec::new();
    for exec in [Exec::Sequential, Exec::Parallel, Exec::Sequential] {
        let run = bmc::verify_detailed(&a, None, &f, &VerifyOptions { exec, ..opts }).map_err(|e| e.to_string())?;
        traces.push(format!("{:?} {:?}", run.verdict.trace, run.verdict.outcome));
        if traces.len() > 1 {
            continue;
        }
        let v = &run.verdict;
        let first = v.trace.iter().find_map(|e| match e {
            TraceEvent::Candidate { k, path } => Some((*k, path.as_str())),
            _ => None,
        });
        ensure(first == Some((2, "s1 (s0 s1)^w")), || format!("first candidate {first:?}"))?;
        let pivot = v.trace.iter().find_map(|e| match e {
            TraceEvent::Spurious { pivot, .. } => Some(pivot.as_str()),
            _ => None,
        });
        ensure(pivot == Some("s1"), || format!("pivot {pivot:?}"))?;
        ensure(v.outcome == Outcome::Holds, || format!("verdict {}", v.outcome))?;
        ensure(v.stats.refinements == 1, || format!("{} refinements", v.stats.refinements))?;

        let ts = run.abstraction.as_ref().ok_or("no abstraction")?;
        let (s0, s2) = (region("x1 - x2 < 0"), region("x1 - x2 >= 3"));
        let (low, high) = (region("x1 - x2 >= 0; x1 - x2 <= 2"), region("x1 - x2 > 2; x1 - x2 < 3"));
        let mut regions: Vec<String> = ts.states().iter().map(|s| s.region.to_string()).collect();
        let mut want: Vec<String> = [&s0, &low, &high, &s2].iter().map(|d| d.to_string()).collect();
        regions.sort();
        want.sort();
        ensure(regions == want, || format!("regions {regions:?}"))?;
        let edges = expected_edges(&[(&s0, &low), (&low, &low), (&high, &s0), (&s2, &s0)]);
        ensure(sorted_edges(ts) == edges, || format!("edges {:?}", sorted_edges(ts)))?;
        let g = translate(&a, &f, ts.predicates()).map_err(|e| e.to_string())?;
        let atom = g.atoms()[0];
        ensure(eventually_always_oracle(ts, atom), || "cycle oracle disagrees".into())?;
    }
    ensure(traces.windows(2).all(|w| w[0] == w[1]), || "runs differ".into())?;
    Ok("F holds unrefined; F G: s1 (s0 s1)^w spurious at s1, 4-state split, holds".into())
}

fn direct() -> Check {
    let a = railway();
    let mut worst = Duration::ZERO;
    for (text, outcome) in
        [("(t1>=2) U (t2>=3)", Outcome::Holds), ("F (t2<=2)", Outcome::Violated), ("F G (t1>=5)", Outcome::Violated)]
    {
        let start = Instant::now();
        let run = bmc::verify_detailed(&a, None, &parse(text).unwrap(), &VerifyOptions::default())
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        worst = worst.max(elapsed);
        within(elapsed, Duration::from_millis(100))?;
        let v = &run.verdict;
        ensure(v.outcome == outcome, || format!("{text}: {}", v.outcome))?;
        ensure(v.reason.starts_with("direct: ") && run.abstraction.is_none(), || format!("{text}: {}", v.reason))?;
        if text.starts_with("F G") {
            ensure(v.reason == "direct: eigenvalue", || format!("{text}: {}", v.reason))?;
        }
    }
    Ok(format!("3 formulas without abstraction, slowest {worst:.2?}"))
}

fn threshold() -> Check {
    let start = Instant::now();
    let cfg = BenchmarkConfig { dims: vec![3], trials: 20, ..BenchmarkConfig::default() };
    let report =
        bench_ct(&cfg, &parse("F G (t1 <= 10)").unwrap(), &VerifyOptions::default()).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(60))?;
    let (below, equal, above) = report.counts();
    ensure(report.rows.len() == 20, || format!("{} trials", report.rows.len()))?;
    ensure(above == 0, || format!("{above} trials above k0 + c"))?;
    Ok(format!("{below} below, {equal} equal, 0 above k0 + c in {:.2?}", start.elapsed()))
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Num> {
    if rng.gen_bool(0.5) {
        (0..n).map(|_| Num::from_int(rng.gen_range(-50..=50))).collect()
    } else {
        (0..n).map(|_| Num::from_ticks(rng.gen_range(-200..=200) * 250_000)).collect()
    }
}

fn partition_and_simulation(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for s in 0..10 {
        let a = random_mpl(3 + s % 3, 2, (1, 10), trial_seed(1, 0, s));
        let ts = AbstractTransitionSystem::from_matrix(&a, Exec::default()).map_err(|e| e.to_string())?;
        for _ in 0..10_000 {
            let x = random_point(rng, a.n());
            let i = ts.abstract_point(&x).map_err(|e| e.to_string())?;
            let inside = ts.states().iter().filter(|st| st.region.contains(&x)).count();
            ensure(inside == 1, || format!("{x:?} lies in {inside} regions"))?;
            let next = a.mat_vec(&x).unwrap();
            ensure(ts.state(i).dynamics.apply(&x) == next, || format!("dynamics at {x:?}"))?;
            let j = ts.abstract_point(&next).map_err(|e| e.to_string())?;
            ensure(ts.has_edge(i, j), || format!("missing edge at {x:?}"))?;
        }
    }
    Ok(())
}

fn transient_identity() -> Result<(), String> {
    for t in 0..20 {
        let (a, _) = random_irreducible(3 + t % 3, 2, (1, 10), trial_seed(2, 0, t));
        let p = a.transient_cyclicity().map_err(|e| e.to_string())?;
        let (k0, c) = (p.transient, p.cyclicity);
        let lc = lambda_times(p.lambda, c).ok_or("λc is fractional")?;
        for k in k0..=k0 + 2 {
            ensure(a.power(k + c) == a.power(k).shifted(lc), || format!("identity fails at k = {k}"))?;
        }
        if k0 > 1 {
            ensure(a.power(k0 - 1 + c) != a.power(k0 - 1).shifted(lc), || "identity holds before k0".into())?;
        }
    }
    Ok(())
}

fn random_dbm(rng: &mut ChaCha8Rng, n: usize) -> Option<Dbm> {
    let cs: Vec<Constraint> = (0..rng.gen_range(0..=5))
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            Constraint::new(
                i,
                j,
                Bound::Finite { value: Num::from_int(rng.gen_range(-4..=4)), strict: rng.gen_bool(0.5) },
            )
        })
        .collect();
    Dbm::from_constraints(n, &cs)
}

fn dbm_laws(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let mut cases = 0;
    while cases < 1000 {
        let n = rng.gen_range(2..=4);
        let (Some(d), Some(e)) = (random_dbm(rng, n), random_dbm(rng, n)) else { continue };
        cases += 1;
        ensure(d.canonicalize().as_ref() == Some(&d), || format!("canonicalization moved {d}"))?;
        let f = AffineDynamics {
            g: (0..n).map(|_| rng.gen_range(0..n)).collect(),
            offsets: (0..n).map(|_| Num::from_int(rng.gen_range(-5..=5))).collect(),
        };
        let pre = e.preimage(&f);
        let meets = pre.as_ref().is_some_and(|p| p.intersects(&d));
        ensure(d.image(&f).intersects(&e) == meets, || format!("adjunction fails for {d} and {e}"))?;
        for _ in 0..20 {
            let x: Vec<Num> = (0..n).map(|_| Num::from_ticks(rng.gen_range(-40..=40) * 250_000)).collect();
            let inside = pre.as_ref().is_some_and(|p| p.contains(&x));
            ensure(inside == e.contains(&f.apply(&x)), || format!("preimage wrong at {x:?}"))?;
        }
    }
    Ok(())
}

fn atom_equivalence(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for s in 0..10 {
        let a = random_mpl(3 + s % 3, 2, (1, 10), trial_seed(3, 0, s));
        let n = a.n();
        let atoms: Vec<_> = (0..4)
            .map(|q| {
                let op = ["<", "<=", ">", ">="][(s + q) % 4];
                *parse(&format!("t{} {op} {}", 1 + (s + q) % n, 1 + (q * 3 + s) % 10)).unwrap().atoms()[0]
            })
            .collect();
        let set = PredicateSet::for_atoms(&a, &atoms).map_err(|e| e.to_string())?;
        for atom in &atoms {
            for _ in 0..1000 {
                let x = random_point(rng, n);
                let truth = evaluate_timediff(&a, &x, atom).map_err(|e| e.to_string())?;
                ensure(set.atom_truth(&a, atom, &set.valuation(&x)) == Some(truth), || format!("{atom} at {x:?}"))?;
            }
        }
    }
    Ok(())
}

fn loop_free_spurious() -> Result<usize, String> {
    let mut paths = 0;
    for t in 0..5 {
        let (a, _) = random_irreducible(3, 2, (1, 10), trial_seed(4, 3, t));
        let ct = a.transient_cyclicity().map_err(|e| e.to_string())?.threshold();
        let ts = AbstractTransitionSystem::from_matrix(&a, Exec::default()).map_err(|e| e.to_string())?;
        for p in noloop_paths(&ts, ct) {
            paths += 1;
            let r = is_spurious_noloop(&ts, &p, ts.init_region());
            ensure(r.status == Status::Spurious, || format!("{p:?} is real on\n{a}"))?;
        }
    }
    Ok(paths)
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    partition_and_simulation(&mut rng).map_err(|e| format!("partition: {e}"))?;
    transient_identity().map_err(|e| format!("transient: {e}"))?;
    dbm_laws(&mut rng).map_err(|e| format!("dbm: {e}"))?;
    atom_equivalence(&mut rng).map_err(|e| format!("atoms: {e}"))?;
    let paths = loop_free_spurious().map_err(|e| format!("loop-free paths: {e}"))?;
    Ok(format!("partition, transient, DBM, atom and {paths} loop-free path checks"))
}

fn concretization() -> Check {
    let specs = ["G (t1 <= 4)", "F G (t2 >= 6)", "G ((t1 < 3) -> X (t2 >= 2))", "G F (t1 > 7)", "X X (t2 < 5)"];
    let mut checked = 0;
    let mut lassos = 0;
    for t in 0..30 {
        let (a, _) = random_irreducible(2 + t % 3, 2, (1, 10), trial_seed(7, 0, t));
        let spec = specs[t % specs.len()];
        let f = parse(spec).unwrap();
        let opts = VerifyOptions { skip_direct: true, ..VerifyOptions::default() };
        let run = bmc::verify_detailed(&a, None, &f, &opts).map_err(|e| e.to_string())?;
        let Some(cex) = run.verdict.counterexample.as_ref() else { continue };
        let ts = run.abstraction.as_ref().ok_or("counterexample without abstraction")?;
        let replay = cex.run.as_ref().ok_or_else(|| format!("{spec}: no concrete run"))?;
        let k0 = run.verdict.spectrum.map_or(0, |p| p.transient);
        ensure(replay.window() == window_len(&cex.path, k0), || format!("{spec}: window"))?;
        if let AbstractPath::Lasso { cycle, .. } = &cex.path {
            lassos += 1;
            ensure(replay.window() >= k0 + cycle.len(), || format!("{spec}: window shorter than k0 plus a period"))?;
        }
        for (i, &s) in replay.states.iter().enumerate() {
            let x = &replay.trajectory[i];
            ensure(a.mat_vec(x).unwrap() == replay.trajectory[i + 1], || format!("{spec}: not a trajectory"))?;
            ensure(ts.abstract_point(x).map_err(|e| e.to_string())? == s, || {
                format!("{spec}: leaves the path at {i}")
            })?;
        }
        ensure(concrete_violation(ts, &f, replay).map_err(|e| e.to_string())?, || {
            format!("{spec}: no violation on\n{a}")
        })?;
        checked += 1;
    }
    ensure(checked >= 5 && lassos >= 1, || format!("only {checked} counterexamples, {lassos} lassos"))?;
    Ok(format!("{checked} counterexamples replayed, {lassos} of them lassos"))
}

fn benchmark() -> Check {
    let start = Instant::now();
    let cfg = BenchmarkConfig { dims: (3..=10).collect(), trials: 10, ..BenchmarkConfig::default() };
    let report = bench_abstraction(&cfg, Exec::default()).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(300))?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    ensure(header == ["n", "trial", "seed", "phase", "micros"], || format!("header {header:?}"))?;
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        ensure(rec.len() == 5, || format!("row {rows} has {} fields", rec.len()))?;
        for i in [0, 1, 2, 4] {
            rec[i].parse::<u128>().map_err(|e| format!("row {rows}: {e}"))?;
        }
        rows += 1;
    }
    ensure(rows == 8 * 10 * 4, || format!("{rows} rows"))?;
    Ok(format!("{rows} CSV rows for n = 3..10 in {:.2?}", start.elapsed()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("spectral values", spectral),
        ("abstraction", abstraction),
        ("verification", verification),
        ("direct verification", direct),
        ("threshold soundness", threshold),
        ("property suites", property_suites),
        ("concretization", concretization),
        ("abstraction benchmark", benchmark),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {why}", i + 1);
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
