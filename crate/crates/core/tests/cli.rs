use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nare::io;

fn nare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nare")).args(args).output().expect("spawn nare")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_transport_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = nare(&["solve", "--n", "200", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = io::read_convergence_csv(&out.join("convergence.csv")).unwrap();
    assert!(recs.last().unwrap().nu <= 1e-12);
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(text.starts_with(io::CSV_HEADER));
    let lx = io::read_matrix_market(&out.join("lx.mtx")).unwrap();
    assert_eq!(lx.shape(), (200, recs.last().unwrap().dim));
    let manifest = io::read_config(&out.join("manifest.txt")).unwrap();
    assert_eq!(manifest["strategy"], "leja");
    assert_eq!(manifest["n"], "200");
}

#[test]
fn max_iter_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = nare(&["solve", "--n", "200", "--max-iter", "3", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn raw_transport_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let o = nare(&["solve", "--n", "200", "--transport-form", "raw", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    assert_eq!(nare(&["solve", "--strategy", "nope"]).status.code(), Some(1));
    let o = nare(&["solve", "--problem", "files", "--a", "/nonexistent.mtx", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "unknown-key = 3\n").unwrap();
    assert_eq!(nare(&["solve", "--config", path(&cfg), "--out", path(&out)]).status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn generate_then_solve_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1");
    let g2 = dir.path().join("g2");
    for g in [&g1, &g2] {
        let o = nare(&["generate", "--problem", "random", "--n", "25", "--p", "2", "--q", "2", "--density", "0.2", "--seed", "9", "--out", path(g)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["a.mtx", "d.mtx", "lb.mtx", "rb.mtx", "lc.mtx", "rc.mtx", "manifest.txt"] {
        assert_eq!(fs::read(g1.join(f)).unwrap(), fs::read(g2.join(f)).unwrap(), "{f}");
    }
    let out = dir.path().join("s");
    let o = nare(&["solve", "--config", path(&g1.join("manifest.txt")), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(io::read_config(&out.join("manifest.txt")).unwrap()["problem"], "files");
}

#[test]
fn generate_transport_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("t");
    assert_eq!(nare(&["generate", "--n", "50", "--out", path(&g)]).status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(&g).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["a.mtx", "d.mtx", "lb.mtx", "lc.mtx", "lphi.mtx", "manifest.txt"]);
    let out = dir.path().join("s");
    assert_eq!(nare(&["solve", "--config", path(&g.join("manifest.txt")), "--out", path(&out)]).status.code(), Some(0));
}

#[test]
fn generate_rejects_zero_density() {
    let dir = tempfile::tempdir().unwrap();
    let o = nare(&["generate", "--problem", "random", "--density", "0", "--out", path(dir.path())]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn bench_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = nare(&["bench", "--n", "300", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 13);
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",converged")), "{summary}");
    assert!(dir.path().join("hami_c_5.csv").exists());
}

#[test]
fn oracle_passes_and_detects_perturbation() {
    let o = nare(&["oracle", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    let o = nare(&["oracle", "--trials", "5", "--perturb", "closed-form"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL closed-form"));
}
