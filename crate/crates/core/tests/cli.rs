use std::fs;
use std::process::{Command, Output};

use certq::cli::{run, ProblemFile};

fn certq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_certq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_problem(dir: &tempfile::TempDir, name: &str, json: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn certify_prints_machine_line() {
    let o = certq(&["certify", "--n", "10", "--eps", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert!(line.starts_with("n=10 eps=1e-6 N=148 eta="), "{line}");
    assert!(line.contains(" lambda=") && line.contains(" tau0="));

    let o = certq(&["certify", "--n", "40", "--eps", "1e-6"]);
    assert!(stdout(&o).contains("N=322"));
}

#[test]
fn certify_rejects_bad_arguments() {
    assert_eq!(
        certq(&["certify", "--n", "1", "--eps", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(certq(&["certify", "--n", "x"]).status.code(), Some(2));
    assert_eq!(certq(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn solve_zero_gradient_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_problem(
        &dir,
        "center.json",
        r#"{"Q": [[1, 0], [0, 1]], "d": [-1, -3.5], "l": [-1, 2], "u": [3, 5]}"#,
    );
    let o = certq(&["solve", &path]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("iterations=0"), "{text}");
    assert!(text.contains("ystar=1,3.5"), "{text}");
}

#[test]
fn solve_clipped_and_coupled_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_problem(
        &dir,
        "clip.json",
        r#"{"Q": [[1]], "d": [-10], "l": [-1], "u": [1]}"#,
    );
    let text = stdout(&certq(&["solve", &path]));
    let y: f64 = text.split("ystar=").nth(1).unwrap().trim().parse().unwrap();
    assert!((y - 1.0).abs() < 1e-4);

    let path = write_problem(
        &dir,
        "coupled.json",
        r#"{"Q": [[2, 1], [1, 2]], "d": [-3, 0], "l": [-1, -1], "u": [1, 1]}"#,
    );
    let trace = dir.path().join("trace.csv");
    let o = certq(&[
        "solve",
        &path,
        "--eps",
        "1e-8",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let ys: Vec<f64> = text
        .split("ystar=")
        .nth(1)
        .unwrap()
        .trim()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((ys[0] - 1.0).abs() < 1e-4 && (ys[1] + 0.5).abs() < 1e-4);
    let csv = fs::read_to_string(trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("k,tau,gap,proximity,stationarity_residual,min_complementary")
    );
    let n_iter = certq::certified_iterations(2, 1e-8).unwrap().iterations;
    assert_eq!(lines.count(), n_iter + 1);
}

#[test]
fn solve_rejects_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write_problem(&dir, "a.json", r#"{"Q": [[1]], "d": [1],"#);
    let o = certq(&["solve", &bad_json]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let bad_dims = write_problem(
        &dir,
        "b.json",
        r#"{"Q": [[1]], "d": [1, 2], "l": [0], "u": [1]}"#,
    );
    let o = certq(&["solve", &bad_dims]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d has length 2"));

    assert_eq!(
        certq(&["solve", "/nonexistent/problem.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn problem_file_field_diagnostics() {
    let e = ProblemFile::parse(r#"{"Q": [[1, 2]], "d": [1], "l": [0], "u": [1]}"#).unwrap_err();
    assert!(e.contains("Q"), "{e}");
    let e = ProblemFile::parse(r#"{"Q": [[1]], "d": [1], "l": [1], "u": [0]}"#).unwrap_err();
    assert!(e.contains("l[0]"), "{e}");
    let e =
        ProblemFile::parse(r#"{"Q": [[1]], "d": [1], "l": [0], "u": [1], "x": 3}"#).unwrap_err();
    assert!(e.contains("unknown field"), "{e}");
}

#[test]
fn demo_reports_invariant_count_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("afti.csv");
    let o = certq(&[
        "demo-afti16",
        "--T",
        "5",
        "--eps",
        "1e-6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("iters=148 (all 0..80 identical)"), "{text}");
    let csv = fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,x1,x2,x3,x4,y1,y2,u1,u2,r1,r2,iters,gap")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 80);
    assert!(rows.iter().all(|r| r.split(',').nth(11) == Some("148")));
}

#[test]
fn demo_other_horizons() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["certq", "demo-afti16", "--T", "20"], &mut out, &mut err);
    assert_eq!(code, 0);
    assert!(String::from_utf8(out).unwrap().contains("iters=322"));

    let mut out = Vec::new();
    let code = run(
        ["certq", "demo-afti16", "--T", "1", "--steps", "10"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let expect = certq::certified_iterations(2, 1e-6).unwrap().iterations;
    assert!(String::from_utf8(out)
        .unwrap()
        .contains(&format!("iters={expect}")));

    assert_eq!(
        run(
            ["certq", "demo-afti16", "--T", "0"],
            &mut Vec::new(),
            &mut Vec::new()
        ),
        2
    );
    assert_eq!(
        run(
            ["certq", "demo-afti16", "--T", "51"],
            &mut Vec::new(),
            &mut Vec::new()
        ),
        2
    );
}

#[test]
fn bench_is_deterministic_and_constant() {
    let args = [
        "bench", "--count", "5", "--nmax", "6", "--eps", "1e-8", "--seed", "42",
    ];
    let a = certq(&args);
    let b = certq(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("all_constant=true"), "{text}");
    for line in text.lines().filter(|l| l.starts_with("n=")) {
        assert!(line.contains("constant=true"));
    }
    let dev: f64 = text
        .split("summary max_dev=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev <= 1e-4);

    assert_eq!(certq(&["bench", "--nmax", "13"]).status.code(), Some(2));
    assert_eq!(certq(&["bench", "--count", "0"]).status.code(), Some(2));
}
