use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RAILWAY: &str = r#"{"matrix":[[2,5],[3,3]],"spec":"F G (t1 <= 5)"}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mplverify"));
    c.env_remove("MPLVERIFY_SEED");
    c
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], model: &Path) -> Output {
    bin().args(args).arg("-m").arg(model).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    let holds = run(&["verify", "--spec", "F (t1 <= 5)"], &m);
    assert_eq!(holds.status.code(), Some(0), "{}", stdout(&holds));
    let violated = run(&["verify", "--spec", "F (t2 <= 2)"], &m);
    assert_eq!(violated.status.code(), Some(1));
    assert!(stdout(&violated).contains("direct: contradiction"));
    // spec from the model file
    assert_eq!(run(&["verify"], &m).status.code(), Some(0));
}

#[test]
fn undecided_exit_code() {
    // the spurious railway lasso needs two unrollings to empty out
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    let o = run(&["verify", "--max-iter", "1", "--json"], &m);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["outcome"], "undecided");
    assert_eq!(run(&["verify", "--max-iter", "2"], &m).status.code(), Some(0));
    assert_eq!(run(&["verify", "--max-refinements", "0"], &m).status.code(), Some(2));
}

#[test]
fn json_verdict_agrees_with_library() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    let a = mplverify::MaxPlusMatrix::from_ints(&[[Some(2), Some(5)], [Some(3), Some(3)]]).unwrap();
    for (spec, code) in [("F (t1 <= 5)", 0), ("F G (t1 <= 5)", 0), ("G (t1 <= 4)", 1), ("F (t2 <= 2)", 1)] {
        let o = run(&["verify", "--json", "--sequential", "--spec", spec], &m);
        assert_eq!(o.status.code(), Some(code), "{spec}");
        let v = json(&o);
        let lib = mplverify::bmc::verify(&a, None, &mplverify::parse(spec).unwrap(), &Default::default()).unwrap();
        assert_eq!(v["outcome"], lib.outcome.to_string());
        assert_eq!(v["reason"], lib.reason);
        assert_eq!(v["stats"]["refinements"], lib.stats.refinements);
    }
}

#[test]
fn explain_shows_trace_and_concrete_run() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    let out = stdout(&run(&["verify", "--explain"], &m));
    assert!(out.contains("candidate s1 (s0 s1)^w"), "{out}");
    assert!(out.contains("spurious at s1"));
    assert!(out.contains("refined s1 into"));
    let out = stdout(&run(&["verify", "--explain", "--spec", "G (t1 <= 4)"], &m));
    assert!(out.contains("concrete run:"), "{out}");
    assert!(out.contains("x(0) = "));
}

#[test]
fn ct_prints_spectrum() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    let o = run(&["ct"], &m);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for line in ["lambda = 4", "k0 = 2", "c = 2", "CT = 4"] {
        assert!(out.lines().any(|l| l == line), "{out}");
    }
    let v = json(&run(&["ct", "--json"], &m));
    assert_eq!(v["threshold"], 4);
    let r = write(&dir, "red.json", r#"{"matrix":[[1,null],[null,1]]}"#);
    assert!(stdout(&run(&["ct"], &r)).contains("reducible"));
}

#[test]
fn direct_subcommand() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    assert_eq!(run(&["direct", "--spec", "(t1>=2) U (t2>=3)"], &m).status.code(), Some(0));
    assert_eq!(run(&["direct", "--spec", "F (t2<=2)"], &m).status.code(), Some(1));
    let o = run(&["direct", "--json", "--spec", "F G (t1>=5)"], &m);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["reason"], "direct: eigenvalue");
    assert_eq!(run(&["direct", "--spec", "F G (t1<=5)"], &m).status.code(), Some(2));
}

#[test]
fn abstract_dump_and_json() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "railway.json", RAILWAY);
    let out = stdout(&run(&["abstract", "--dump"], &m));
    assert!(out.contains("states: 3"));
    assert!(out.contains("x1 - x2 < 0"));
    let v = json(&run(&["abstract", "--json"], &m));
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
    assert_eq!(v["edges"], 4);
    assert_eq!(v["states"][1]["dynamics"], serde_json::json!([2, 1]));
}

#[test]
fn random_is_seeded() {
    let dir = TempDir::new().unwrap();
    let gen = |seed: Option<&str>| {
        let mut c = bin();
        c.args(["random", "-n", "4", "--irreducible"]);
        if let Some(s) = seed {
            c.env("MPLVERIFY_SEED", s);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(gen(Some("5")), gen(Some("5")));
    assert_ne!(gen(Some("5")), gen(Some("6")));
    let out = dir.path().join("r.json");
    let o = bin().args(["random", "-n", "3", "--seed", "1", "--spec", "F (t1 <= 3)", "-o"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let model = mplverify::harness::load_model(&out).unwrap();
    assert_eq!(model.matrix.finite_count(), 6);
    assert!(bin().arg("ct").arg("-m").arg(&out).output().unwrap().status.success());
}

#[test]
fn bench_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("t.csv");
    let o = bin().args(["bench", "abstraction", "--dims", "3,4", "--trials", "2", "--csv"]).arg(&csv).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,trial,seed,phase,micros"));
    assert_eq!(lines.count(), 2 * 2 * 4);

    let o = bin().args(["bench", "ct", "--dims", "3", "--trials", "3"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("n,trial,seed,ct_empirical,ct_lemma,verdict\n"));
    assert!(out.contains("ct_empirical > ct_lemma: 0"), "{out}");
}

#[test]
fn usage_and_load_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    assert_eq!(bin().output().unwrap().status.code(), Some(3));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(3));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("--version").output().unwrap().status.code(), Some(0));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["verify", "--spec", "F (t1 <= 5)"], &missing).status.code(), Some(3));
    let bad = write(&dir, "bad.json", r#"{"matrix":[[null,null],[1,2]]}"#);
    let o = run(&["verify", "--spec", "F (t1 <= 5)"], &bad);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row"));
    let m = write(&dir, "railway.json", r#"{"matrix":[[2,5],[3,3]]}"#);
    assert_eq!(run(&["verify"], &m).status.code(), Some(3));
    assert_eq!(run(&["verify", "--spec", "F (t3 <= 1)"], &m).status.code(), Some(3));
    assert_eq!(run(&["verify", "--spec", "F (t1 <="], &m).status.code(), Some(3));
}
