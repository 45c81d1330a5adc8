use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CYCLE2: &str = "vertices: 2\nedge: e1 1 2 1.0\nedge: e2 2 1 1.0\n";
const LOOPS: &str = "vertices: 2\nedge: e1 1 1 1.0\nedge: e2 2 2 1.0\n";
const CYCLE3: &str = "vertices: 3\nedge: e1 1 2 1.0\nedge: e2 2 3 1.0\nedge: e3 3 1 1.0\n";
const RAMP: &str = "piecewise-poly\ndim: 2\nbreakpoints: 0 1\ncell: 0\n0 1\n1 -1\nend\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_flowreach"));
    c.env_remove("FLOWREACH_OUT");
    c
}

fn put(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn matrices_two_cycle() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c2.net", CYCLE2);
    let o = run(&["matrices", p(&net)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("residual_intertwining = 0.0 (0x0p+0)"));
    assert!(out.contains("relations_pass = true"));
}

#[test]
fn matrices_dynamic_mode() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c3.net", CYCLE3);
    let o = run(&["matrices", p(&net), "--mode", "dynamic"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("mode = dynamic"));
    assert!(stdout(&o).contains("residual_dynamic_definition = 0.0"));
}

#[test]
fn bad_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = put(dir.path(), "bad.net", "vertices: 2\nedge: e1 1 2 0.5\nedge: e2 2 1 1.0\n");
    assert_eq!(code(&run(&["matrices", p(&bad)])), 2);
    assert_eq!(code(&run(&["matrices", "/nonexistent/file.net"])), 2);
    let net = put(dir.path(), "c2.net", CYCLE2);
    assert_eq!(code(&run(&["reach", p(&net), "--vertex", "3"])), 2);
    assert_eq!(code(&run(&["reach", p(&net), "--vertex", "0"])), 2);
}

#[test]
fn reach_verdicts() {
    let dir = TempDir::new().unwrap();
    let c2 = put(dir.path(), "c2.net", CYCLE2);
    let loops = put(dir.path(), "loops.net", LOOPS);
    let c3 = put(dir.path(), "c3.net", CYCLE3);
    assert_eq!(code(&run(&["reach", p(&c2), "--vertex", "1"])), 0);
    let o = run(&["reach", p(&loops), "--vertex", "1"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("rank = 1"));
    let o = run(&["reach", p(&c3), "--vertex", "1", "--positive"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("positive_controllable = true"));
    let o = run(&["reach", p(&c3), "--vertex", "2", "--mode", "dynamic"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("grades = 0 1 2"));
}

#[test]
fn simulate_identity_and_unit_step() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c2.net", CYCLE2);
    let f = put(dir.path(), "f.txt", RAMP);
    let o = run(&["simulate", p(&net), "--state", p(&f), "--time", "0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("0.0 1.0\n1.0 -1.0\n"));
    // T(1) f = B f swaps the components
    let o = run(&["simulate", p(&net), "--state", p(&f), "--time", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("1.0 -1.0\n0.0 1.0\n"));
    assert_eq!(code(&run(&["simulate", p(&net), "--state", p(&f), "--time", "-0.5"])), 2);
}

#[test]
fn simulate_dynamic_vertex_state() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c2.net", CYCLE2);
    let x = put(
        dir.path(),
        "x.txt",
        "extended-state\npiecewise-poly\ndim: 2\nbreakpoints: 0 1\ncell: 0\n0\n0\nend\nvertex: 1 2\n",
    );
    let o = run(&["simulate", p(&net), "--mode", "dynamic", "--state", p(&x), "--time", "1"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("1.0 0.0\n2.0 0.0\n"), "{out}");
    assert!(out.contains("vertex: 1.0 2.0"));
}

#[test]
fn steer_reachable_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c2.net", CYCLE2);
    let t = put(dir.path(), "t.txt", RAMP);
    let out = dir.path().join("out");
    let o = run(&["steer", p(&net), "--target", p(&t), "--vertex", "1", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for f in ["report.txt", "control.txt", "control.csv", "final.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(fs::read_to_string(out.join("report.txt")).unwrap().contains("verified = true"));
}

#[test]
fn steer_unreachable_and_negative_target() {
    let dir = TempDir::new().unwrap();
    let loops = put(dir.path(), "loops.net", LOOPS);
    let c2 = put(dir.path(), "c2.net", CYCLE2);
    let t = put(dir.path(), "t.txt", RAMP);
    let o = run(&["steer", p(&loops), "--target", p(&t), "--vertex", "1"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("verified = false"));
    let o = run(&["steer", p(&loops), "--target", p(&t), "--vertex", "1", "--positive"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("axis2_certificate = "));
    let neg = put(dir.path(), "neg.txt", "piecewise-poly\ndim: 2\nbreakpoints: 0 1\ncell: 0\n-1\n0\nend\n");
    assert_eq!(code(&run(&["steer", p(&c2), "--target", p(&neg), "--vertex", "1", "--positive"])), 2);
    assert_eq!(code(&run(&["steer", p(&c2), "--target", p(&t), "--vertex", "1", "--mode", "dynamic"])), 2);
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c3.net", CYCLE3);
    let a = run(&["reach", p(&net), "--vertex", "1", "--positive", "--seed", "9"]);
    let b = run(&["reach", p(&net), "--vertex", "1", "--positive", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("seed = 9"));
}

#[test]
fn json_report_and_env_out_dir() {
    let dir = TempDir::new().unwrap();
    let net = put(dir.path(), "c2.net", CYCLE2);
    let out = dir.path().join("envout");
    let o = bin().args(["--json", "matrices", p(&net)]).env("FLOWREACH_OUT", &out).output().unwrap();
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(text.contains("\"relations_pass\": true"));
    assert!(text.contains("\"seed\": 1"));
}

#[test]
fn selftest_quick_passes() {
    let o = run(&["selftest", "--quick", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("all_pass = true"));
}
