//! Command implementations. Each returns the process exit code:
//! 0 success, 2 parse error, 3 flow failure, 4 eigensolver failure.

use crate::scenario::{Kind, Scenario};
use crate::trace_io::{to_csv, Table};
use crate::{checks, svg, CliError};
use pqflow_core::geomflow::comparison_bound_y;
use pqflow_core::monitor::{
    einstein_trace, integrated_lower_bound_check, monotonicity_verdict, run_trace, MonotoneTarget,
    Status, TraceRecord, Verdict,
};
use pqflow_core::pqeigen::first_eigenpair;
use std::path::{Path, PathBuf};

fn map_runtime(e: pqflow_core::Error) -> CliError {
    match e {
        pqflow_core::Error::SolverFailure(msg) => CliError::Eigen(msg),
        other => CliError::Flow(other.to_string()),
    }
}

/// Formula-vs-finite-difference agreement on interior records:
/// |G - dlambda_fd| <= 5% (|dlambda_fd| + 0.01 lambda).
pub fn variation_match_verdict(trace: &[TraceRecord<f64>]) -> Verdict {
    let interior: Vec<&TraceRecord<f64>> = trace
        .iter()
        .skip(1)
        .take(trace.len().saturating_sub(2))
        .filter(|r| !r.degraded)
        .collect();
    if interior.is_empty() {
        return Verdict::info("variation-formula-match", 0.0, "no interior records".into());
    }
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for rec in interior {
        let tol = 0.05 * (rec.dlambda_fd.abs() + 0.01 * rec.lambda.abs());
        let margin = tol - (rec.g_formula - rec.dlambda_fd).abs();
        if margin < worst {
            worst = margin;
            at = rec.t;
        }
    }
    Verdict::pass_fail("variation-formula-match", worst, format!("t = {at}"))
}

/// S_min(t) >= y(t) - 1e-3 (1 + |y|) along an unnormalized trace.
pub fn comparison_bound_verdict(trace: &[TraceRecord<f64>], m: usize) -> Verdict {
    let Some(first) = trace.first() else {
        return Verdict::info("comparison-bound", 0.0, "empty trace".into());
    };
    let s0 = first.s_min;
    let t0 = first.t;
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for rec in trace {
        let Ok(y) = comparison_bound_y(rec.t - t0, s0, m) else {
            return Verdict::pass_fail("comparison-bound", -1.0, format!("y blew up before t = {}", rec.t));
        };
        let margin = rec.s_min - y + 1e-3 * (1.0 + y.abs());
        if margin < worst {
            worst = margin;
            at = rec.t;
        }
    }
    Verdict::pass_fail("comparison-bound", worst, format!("t = {at}"))
}

/// Volume conservation for normalized runs: relative drift <= 1e-3.
pub fn volume_drift_verdict(trace: &[TraceRecord<f64>]) -> Verdict {
    let Some(first) = trace.first() else {
        return Verdict::info("volume-drift", 0.0, "empty trace".into());
    };
    let v0 = first.volume;
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for rec in trace {
        let margin = 1e-3 - ((rec.volume - v0) / v0).abs();
        if margin < worst {
            worst = margin;
            at = rec.t;
        }
    }
    Verdict::pass_fail("volume-drift", worst, format!("t = {at}"))
}

/// Executes one scenario: trace (flow + eigensolves or closed form) plus the
/// full verdict set.
pub fn run_scenario(s: &Scenario) -> Result<(Vec<TraceRecord<f64>>, Vec<Verdict>), CliError> {
    let (trace, m) = if let Some(params) = s.einstein_params_checked() {
        let spec = s.einstein.as_ref().unwrap();
        let trace =
            einstein_trace(&params, spec.lambda0, spec.vol0, s.flow.records, s.flow.t_end)
                .map_err(map_runtime)?;
        (trace, spec.m)
    } else {
        let state = s.initial_state()?;
        let m = state.g.grid().dim();
        let trace = run_trace(&state, &s.flow, &s.eigen).map_err(map_runtime)?;
        (trace, m)
    };

    let mut verdicts = vec![
        monotonicity_verdict(&trace, MonotoneTarget::Lambda),
        monotonicity_verdict(&trace, MonotoneTarget::Q),
        integrated_lower_bound_check(&trace),
        variation_match_verdict(&trace),
    ];
    if s.flow.normalized {
        verdicts.push(volume_drift_verdict(&trace));
    } else {
        verdicts.push(comparison_bound_verdict(&trace, m));
    }
    Ok((trace, verdicts))
}

fn format_verdict(v: &Verdict) -> String {
    let tag = match v.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Info => "INFO",
    };
    format!("{tag} {:<28} margin={:+.3e}  {}", v.name, v.margin, v.location)
}

fn default_out(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

fn run_one(path: &Path) -> (String, i32) {
    let mut out = String::new();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return (format!("error: {}: {e}\n", path.display()), 2),
    };
    let scenario = match Scenario::parse(&text) {
        Ok(s) => s,
        Err(e) => return (format!("error: {}: {e}\n", path.display()), e.code()),
    };
    let (trace, verdicts) = match run_scenario(&scenario) {
        Ok(r) => r,
        Err(e) => return (format!("error: {}: {e}\n", path.display()), e.code()),
    };
    let csv_path = scenario.csv_out.clone().unwrap_or_else(|| default_out(path, "csv"));
    if let Err(e) = std::fs::write(&csv_path, to_csv(&trace)) {
        return (format!("error: writing {}: {e}\n", csv_path.display()), 3);
    }
    out.push_str(&format!("{}: {} records -> {}\n", path.display(), trace.len(), csv_path.display()));
    let mut code = 0;
    for v in &verdicts {
        out.push_str(&format_verdict(v));
        out.push('\n');
        if v.status == Status::Fail {
            code = 1;
        }
    }
    (out, code)
}

fn thread_cap(jobs: usize) -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = std::env::var("PQFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(hw);
    cap.min(jobs).max(1)
}

pub fn cmd_run(paths: &[PathBuf]) -> i32 {
    if paths.is_empty() {
        eprintln!("error: no scenario files");
        return 2;
    }
    let cap = thread_cap(paths.len());
    let mut results: Vec<Option<(String, i32)>> = vec![None; paths.len()];
    let mut next = 0usize;
    while next < paths.len() {
        let batch: Vec<(usize, PathBuf)> = (next..(next + cap).min(paths.len()))
            .map(|i| (i, paths[i].clone()))
            .collect();
        next += batch.len();
        let handles: Vec<_> = batch
            .into_iter()
            .map(|(i, p)| (i, std::thread::spawn(move || run_one(&p))))
            .collect();
        for (i, h) in handles {
            results[i] = Some(h.join().unwrap_or_else(|_| ("error: worker panicked\n".into(), 3)));
        }
    }
    let mut code = 0;
    for r in results.into_iter().flatten() {
        print!("{}", r.0);
        code = code.max(r.1);
    }
    code
}

pub fn cmd_eigen(path: &Path) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return 2;
        }
    };
    let scenario = match Scenario::parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    if scenario.kind == Kind::EinsteinAnalytic {
        eprintln!("error: einstein_analytic has no grid eigenproblem");
        return 2;
    }
    let state = match scenario.initial_state() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let pair = match first_eigenpair(&state.g, &scenario.eigen, None) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return map_runtime(e).code();
        }
    };
    println!("lambda = {:.16e}", pair.lambda);
    println!("kkt_residual = {:.3e} (scale {:.3e})", pair.kkt_residual, pair.kkt_scale);
    println!(
        "constraints |B-1| = {:.3e}, |C_u| = {:.3e}, |C_v| = {:.3e}",
        pair.constraint_residuals[0], pair.constraint_residuals[1], pair.constraint_residuals[2]
    );
    println!("iterations = {}, restarts = {}, converged = {}", pair.iterations, pair.restarts, pair.converged);

    let fields_path = scenario.fields_out.clone().unwrap_or_else(|| default_out(path, "fields.csv"));
    let grid = *state.g.grid();
    let mut dump = String::from("x,y,u,v\n");
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let (x, y) = grid.coord(i, j);
            dump.push_str(&format!(
                "{x:.16e},{y:.16e},{:.16e},{:.16e}\n",
                pair.u.values()[k],
                pair.v.values()[k]
            ));
        }
    }
    if let Err(e) = std::fs::write(&fields_path, dump) {
        eprintln!("error: writing {}: {e}", fields_path.display());
        return 3;
    }
    println!("fields -> {}", fields_path.display());
    if pair.converged {
        0
    } else {
        4
    }
}

pub fn cmd_check() -> i32 {
    match checks::invariant_suite() {
        Ok(verdicts) => {
            let mut code = 0;
            for v in &verdicts {
                println!("{}", format_verdict(v));
                if !v.passed() {
                    code = 1;
                }
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            map_runtime(e).code()
        }
    }
}

pub fn cmd_plot(csv: &Path, cols: &str, out: &Path) -> i32 {
    let text = match std::fs::read_to_string(csv) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", csv.display());
            return 2;
        }
    };
    let table = match Table::parse(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cols: Vec<String> = cols.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect();
    match svg::render(&table, &cols) {
        Ok(body) => {
            if let Err(e) = std::fs::write(out, body) {
                eprintln!("error: writing {}: {e}", out.display());
                return 3;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
