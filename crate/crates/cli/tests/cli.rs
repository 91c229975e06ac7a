//! Black-box tests of the `pqflow` binary: exit-code contract, byte-level
//! determinism of CSV traces, and stable SVG emission.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pqflow"))
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

const SCENARIO: &str = "scenario.kind = conformal_torus\n\
                        grid.n = 24\n\
                        init.u0.cos_x = 0.15\n\
                        flow.t_end = 0.02\n\
                        flow.records = 3\n\
                        eigen.p = 2\n";

#[test]
fn run_writes_csv_and_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.cfg", SCENARIO);
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("a.csv");
    let first = std::fs::read(&csv).unwrap();
    assert!(String::from_utf8_lossy(&first).starts_with("t,lambda,S_min,volume,r,cond_min,Q,"));

    let out2 = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(out2.status.success());
    assert_eq!(first, std::fs::read(&csv).unwrap(), "rerun CSV differs");
    assert_eq!(out.stdout, out2.stdout, "verdict output differs");
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "scenario.kind = conformal_torus\nbogus = 1\n");
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // missing file also reports a parse-level failure
    let out = bin().arg("run").arg(dir.path().join("nope.cfg")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().arg("eigen").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eigen_prints_lambda_and_dumps_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.cfg", SCENARIO);
    let out = bin().arg("eigen").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lambda = "));
    assert!(text.contains("converged = true"));
    let fields = std::fs::read_to_string(dir.path().join("e.fields.csv")).unwrap();
    assert!(fields.starts_with("x,y,u,v\n"));
    assert_eq!(fields.lines().count(), 1 + 24 * 24);
}

#[test]
fn sweep_respects_thread_cap_and_runs_all() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.cfg", SCENARIO);
    let b = write(dir.path(), "b.cfg", &SCENARIO.replace("0.15", "0.1"));
    let out = bin().arg("run").arg(&a).arg(&b).env("PQFLOW_THREADS", "1").output().unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("a.csv").exists());
    assert!(dir.path().join("b.csv").exists());
}

#[test]
fn plot_svg_is_deterministic_and_rejects_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.cfg", SCENARIO);
    assert!(bin().arg("run").arg(&cfg).output().unwrap().status.success());
    let csv = dir.path().join("p.csv");
    let svg1 = dir.path().join("one.svg");
    let svg2 = dir.path().join("two.svg");
    for (svg, _) in [(&svg1, 0), (&svg2, 0)] {
        let out = bin().arg("plot").arg(&csv).arg("--cols").arg("lambda,Q").arg("-o").arg(svg).output().unwrap();
        assert!(out.status.success());
    }
    let b1 = std::fs::read(&svg1).unwrap();
    assert_eq!(b1, std::fs::read(&svg2).unwrap());
    assert!(String::from_utf8_lossy(&b1).contains("<polyline"));

    // header-only trace: nothing to plot
    let empty = write(dir.path(), "empty.csv", "t,lambda\n");
    let out = bin().arg("plot").arg(&empty).arg("--cols").arg("lambda").arg("-o").arg(dir.path().join("x.svg")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown column
    let out = bin().arg("plot").arg(&csv).arg("--cols").arg("nope").arg("-o").arg(dir.path().join("y.svg")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn einstein_scenario_runs_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ein.cfg",
        "scenario.kind = einstein_analytic\neinstein.a = 1\neinstein.lambda0 = 3\n\
         flow.t_end = 0.2\nflow.records = 8\neigen.p = 2\n",
    );
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS lambda-nondecreasing"));
    assert!(text.contains("PASS Q-nondecreasing"));
    // eigen subcommand has no grid state for the analytic family
    let out = bin().arg("eigen").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
