use std::path::Path;
use std::process::{Command, Output};

fn semiquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiquad"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.ini");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn bounds_defaults_print_csv() {
    let out = semiquad(&["bounds"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# table bounds_nodes"));
    assert!(text.contains("scheme,mode,M,delta,a,m,t,h,N,graph_norm,e_disc,e_trunc,total"));
    assert!(!text.contains('\r'));
}

#[test]
fn plan_writes_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scheme]\neps = 1e-6\nm = 6\ndelta = 2\nT = 1\ngraph_norm = 16\n",
    );
    let out_dir = dir.path().join("out");
    let out = semiquad(&["plan", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("plan.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[7], "73");
    assert_eq!(row[8], "147");
}

#[test]
fn run_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[scheme]\nN = 30\n[grid]\nn = 32\n[run]\nt_points = 5\nsolution = true\n",
    );
    let a = semiquad(&["run", "--config", &cfg, "--workers", "1"]);
    let b = semiquad(&["run", "--config", &cfg, "--workers", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("# table run_solution"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scheme]\nm = 3\n");
    assert_eq!(semiquad(&["run", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "[scheme]\nbogus = 1\n");
    assert_eq!(
        semiquad(&["bounds", "--config", &cfg]).status.code(),
        Some(2)
    );
    assert_eq!(semiquad(&["plan"]).status.code(), Some(2));
    assert_eq!(
        semiquad(&["run", "--config", "/nonexistent/exp.ini"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn infeasible_plan_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[scheme]\neps = 1e-12\nm = 2\ngraph_norm = 1\n");
    let out = semiquad(&["plan", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
