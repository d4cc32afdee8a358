use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotopt")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn rotset_three_symbol_basis() {
    let o = run(&["rotset", "--shift", &data("three.shift"), "--phi", &data("three-indicators.pot")]);
    assert_eq!(code(&o), 0);
    let mut lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    lines.sort();
    assert_eq!(lines, ["vertex 0 0 1 cycle 3", "vertex 0 1 0 cycle 2", "vertex 1 0 0 cycle 1"]);
}

#[test]
fn rotset_golden_mean_and_constant() {
    let o = run(&["rotset", "--shift", &data("golden.shift"), "--phi", &data("x0.pot")]);
    assert_eq!(stdout(&o), "vertex 0 cycle 0\nvertex 1/2 cycle 0 1\n");
    let o = run(&["rotset", "--shift", &data("full2.shift"), "--phi", &data("zero.pot")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn rotset_svg_needs_two_dimensions() {
    let svg = std::env::temp_dir().join(format!("rotopt-{}-tri.svg", std::process::id()));
    let o = run(&["rotset", "--shift", &data("three.shift"), "--phi", &data("three-reduced.pot"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("viewBox=\"0 0 1000 1000\""));
    let o = run(&["rotset", "--shift", &data("golden.shift"), "--phi", &data("x0.pot"), "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn beta_full_shift() {
    let o = run(&[
        "beta",
        "--shift",
        &data("full2.shift"),
        "--phi",
        &data("x0.pot"),
        "--f",
        &data("freq01.pot"),
        "--h",
        "1/2",
        "--max-cycle-len",
        "3",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "beta = 1/2");
    assert_eq!(lines[1], "unique = true");
    assert_eq!(lines[2], "entropy = ~0.000000000000");
    assert_eq!(lines[3], "order 1");
    assert!(out.contains("oracle (length <= 3) = 1/2"));
}

#[test]
fn beta_infeasible_and_flat() {
    let o = run(&["beta", "--shift", &data("full2.shift"), "--phi", &data("x0.pot"), "--f", &data("freq01.pot"), "--h", "3/2"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("h outside rotation set"));
    let o = run(&["beta", "--shift", &data("full2.shift"), "--phi", &data("x0.pot"), "--f", &data("zero.pot"), "--h", "1/2"]);
    let out = stdout(&o);
    assert!(out.starts_with("beta = 0\nunique = false\n"));
}

#[test]
fn beta_maximizer_reparses() {
    let o = run(&["beta", "--shift", &data("golden.shift"), "--phi", &data("x0.pot"), "--f", &data("freq01.pot"), "--h", "2/5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let occ: String = out.lines().skip(3).map(|l| format!("{l}\n")).collect();
    let path = std::env::temp_dir().join(format!("rotopt-{}-max.occ", std::process::id()));
    std::fs::write(&path, occ).unwrap();
    let o = run(&["entropy", "--shift", &data("golden.shift"), "--nu", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("entropy = ~"));
}

#[test]
fn approx_prints_exact_verification() {
    let o = run(&[
        "approx",
        "--shift",
        &data("full2.shift"),
        "--phi",
        &data("x0.pot"),
        "--h",
        "7/12",
        "--nu",
        &data("full2-mix.occ"),
        "--eps",
        "1/10",
        "--f",
        &data("freq01.pot"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("plan\n"));
    assert!(out.contains("\nx = "));
    assert!(out.contains("rv(x) = 7/12 (exact)"));
    assert!(out.contains("weak* close = true"));
    assert!(!out.contains(" != "));
}

#[test]
fn approx_rejects_bad_inputs() {
    let base =
        ["approx", "--shift", &data("full2.shift"), "--phi", &data("x0.pot"), "--h", "7/12", "--nu", &data("full2-mix.occ"), "--eps"];
    let o = run(&[&base[..], &["0"]].concat());
    assert_eq!(code(&o), 2);
    let o = run(&[&base[..], &["ten"]].concat());
    assert_eq!(code(&o), 2);
    let o = run(&[
        "approx",
        "--shift",
        &data("full2.shift"),
        "--phi",
        &data("x0.pot"),
        "--h",
        "1/2",
        "--nu",
        &data("full2-mix.occ"),
        "--eps",
        "1/10",
    ]);
    assert_eq!(code(&o), 2, "h must match the measure");
}

#[test]
fn approx_boundary_and_degenerate() {
    let o = run(&[
        "approx",
        "--shift",
        &data("three.shift"),
        "--phi",
        &data("three-reduced.pot"),
        "--h",
        "1/2,0",
        "--nu",
        &data("three-boundary.occ"),
        "--eps",
        "1/10",
    ]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("BoundaryRotationVector"));
    let o = run(&[
        "approx",
        "--shift",
        &data("three.shift"),
        "--phi",
        &data("three-indicators.pot"),
        "--h",
        "1/2,0,1/2",
        "--nu",
        &data("three-boundary.occ"),
        "--eps",
        "1/10",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn synthesize_seven_twelfths() {
    let o = run(&[
        "synthesize",
        "--shift",
        &data("full2.shift"),
        "--phi",
        &data("x0.pot"),
        "--u",
        "0 1",
        "--cycle",
        "0 1",
        "--cycle",
        "0 1 1",
        "--h",
        "7/12",
        "--eps",
        "1/10",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("|x| = 72\n"));
    assert!(out.contains("x = (0 1)^3 (0 1 1)^2 [(0 1)^3 (0 1 1)^2]^5\n"));
    assert!(out.contains("rv(x) = 7/12 (exact)"));
}

#[test]
fn synthesize_rank_deficient_is_degenerate() {
    let o = run(&[
        "synthesize",
        "--shift",
        &data("full2.shift"),
        "--phi",
        &data("x0.pot"),
        "--u",
        "0",
        "--cycle",
        "0 1",
        "--cycle",
        "1 0",
        "--h",
        "1/2",
        "--eps",
        "1/10",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn entropy_lines_are_marked_approximate() {
    let o = run(&["entropy", "--shift", &data("golden.shift"), "--cycle", "0 1"]);
    assert_eq!(stdout(&o), "entropy = ~0.000000000000\n");
    let o = run(&["entropy", "--shift", &data("golden.shift")]);
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    let v: f64 = first.strip_prefix("max entropy = ~").unwrap().parse().unwrap();
    assert!((v - ((1.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-9);
}

#[test]
fn experiment_is_reproducible() {
    let args = [
        "experiment",
        "--shift",
        &data("golden.shift"),
        "--phi",
        &data("x0.pot"),
        "--h",
        "2/5",
        "--trials",
        "10",
        "--order",
        "2",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.starts_with("trial\tbeta\tunique\tout_degrees\tentropy\n"));
    assert_eq!(out.lines().filter(|l| l.split('\t').count() == 5).count(), 11);
}

#[test]
fn regression_check_command() {
    let o = run(&["verify-paper"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = run(&["verify-paper", "--only", "remark-3x3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).all(|l| l.contains("remark-3x3")));
    let o = run(&["verify-paper", "--only", "no-such-check"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["rotset", "--shift", "/nonexistent.shift", "--phi", &data("x0.pot")]);
    assert_eq!(code(&o), 2);
    let o = run(&["beta", "--shift", &data("full2.shift"), "--phi", &data("x0.pot"), "--f", &data("freq01.pot"), "--h", "1/0"]);
    assert_eq!(code(&o), 2);
    let o = run(&["rotset", "--shift", &data("x0.pot"), "--phi", &data("x0.pot")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("x0.pot"));
}
