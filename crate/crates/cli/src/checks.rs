//! Built-in invariant suite behind `pqflow check`: structural identities of
//! the discrete operators and flow that must hold on any healthy build.

use pqflow_core::diffgeo::{
    coupling_tensors, grad_norm_sq, integrate, p_laplacian, volume, Grid, MetricField, ScalarField,
};
use pqflow_core::geomflow::{
    comparison_bound_y, rhs_unnormalized, CoupledState, FlowConfig,
};
use pqflow_core::monitor::{lemma_continuity_check, run_trace, Verdict};
use pqflow_core::pqeigen::{first_eigenpair, EigenParams};
use pqflow_core::Result;
use std::f64::consts::PI;

fn curved_metric(n: usize) -> MetricField<f64> {
    let grid = Grid::torus(n, 2.0 * PI, 2.0 * PI).unwrap();
    let u0 = ScalarField::from_fn(grid, |x, y| 0.2 * x.sin() + 0.1 * (x + y).cos());
    MetricField::conformal(&u0).unwrap()
}

/// int Delta_p f dmu = 0 to round-off on the periodic grid (divergence
/// theorem of the staggered-flux operator).
fn divergence_theorem() -> Result<Verdict> {
    let g = curved_metric(48);
    let grid = *g.grid();
    let f = ScalarField::from_fn(grid, |x, y| x.sin() + 0.5 * (2.0 * y).cos());
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut at = String::new();
    for p in [2.0, 3.5, 4.0] {
        let lap = p_laplacian(&f, &g, p, 1e-8)?;
        let total = integrate(&lap, &g)?.abs();
        let scale = 1e-10 * f.max_abs() * volume(&g);
        let rel = total / scale;
        if rel > worst {
            worst = rel;
            at = format!("p = {p}");
        }
    }
    Ok(Verdict::pass_fail("divergence-theorem", 1.0 - worst, at))
}

/// lambda(c g) c^{p/2} constant over homotheties, p in {2, 4}.
fn scaling_laws() -> Result<Verdict> {
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    {
        let grid = Grid::torus(32, 2.0 * PI, 2.0 * PI).unwrap();
        let g = MetricField::flat(grid);
        let params = EigenParams::new(2.0, 2.0, 0.0)?;
        let base = first_eigenpair(&g, &params, None)?.lambda;
        for c in [0.5, 2.0] {
            let lam = first_eigenpair(&g.scaled(c)?, &params, None)?.lambda;
            let margin = 5e-3 - (lam * c / base - 1.0).abs();
            if margin < worst {
                worst = margin;
                at = format!("torus p = 2, c = {c}");
            }
        }
    }
    {
        let grid = Grid::circle(128, 2.0 * PI).unwrap();
        let g = MetricField::flat(grid);
        let params = EigenParams::symmetric(4.0)?;
        let base = first_eigenpair(&g, &params, None)?.lambda;
        for c in [0.5, 2.0] {
            let lam = first_eigenpair(&g.scaled(c)?, &params, None)?.lambda;
            let margin = 5e-3 - (lam * c * c / base - 1.0).abs();
            if margin < worst {
                worst = margin;
                at = format!("circle p = 4, c = {c}");
            }
        }
    }
    Ok(Verdict::pass_fail("scaling-law", worst, at))
}

/// Continuity bound on a pure homothety g2 = (1 + eps) g1.
fn continuity_on_homothety() -> Result<Verdict> {
    let grid = Grid::torus(32, 2.0 * PI, 2.0 * PI).unwrap();
    let g1 = MetricField::flat(grid);
    let g2 = g1.scaled(1.1)?;
    let params = EigenParams::new(2.0, 2.0, 0.0)?;
    let mut v = lemma_continuity_check(&g1, &g2, 0.1, &params)?;
    v.name = "continuity-bound-homothety".into();
    Ok(v)
}

/// d/dt |grad f|^p for a held field f along the flow equals
/// p |grad f|^{p-2} S(grad f, grad f); checked pointwise by central
/// differences in t, 2% in the max norm.
fn gradient_derivative_identity() -> Result<Verdict> {
    let g = curved_metric(48);
    let grid = *g.grid();
    let kappa = 0.5;
    let phi = ScalarField::from_fn(grid, |x, _| 0.3 * x.sin());
    let state = CoupledState::new(g, phi, 0.0)?;
    let f = ScalarField::from_fn(grid, |x, y| x.sin() + 0.4 * y.cos());
    let p = 4.0;

    let rates = rhs_unnormalized(&state, kappa)?;
    let dt = 1e-5;
    let g_plus = state.g.advanced(dt, &rates.metric)?;
    let g_minus = state.g.advanced(-dt, &rates.metric)?;
    let np = grad_norm_sq(&f, &g_plus)?.map(|v| v.powf(p / 2.0));
    let nm = grad_norm_sq(&f, &g_minus)?.map(|v| v.powf(p / 2.0));

    let (s_tensor, _) = coupling_tensors(&state.g, &state.phi, kappa)?;
    let gn = grad_norm_sq(&f, &state.g)?;
    let mut worst_err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut at = 0usize;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let fd = (np.values()[k] - nm.values()[k]) / (2.0 * dt);
            let dx = f.centered(i, j, 0);
            let dy = f.centered(i, j, 1);
            let gx = state.g.inv_xx()[k] * dx + state.g.inv_xy()[k] * dy;
            let gy = state.g.inv_xy()[k] * dx + state.g.inv_yy()[k] * dy;
            let predicted = p * gn.values()[k].powf(p / 2.0 - 1.0) * s_tensor.quad(k, gx, gy);
            let err = (fd - predicted).abs();
            scale = scale.max(predicted.abs());
            if err > worst_err {
                worst_err = err;
                at = k;
            }
        }
    }
    Ok(Verdict::pass_fail(
        "gradient-derivative-identity",
        0.02 * scale - worst_err,
        format!("node {at}"),
    ))
}

/// d(Vol)/dt = -int S dmu under the unnormalized flow, central differences
/// with a halved step, 2%.
fn volume_rate_identity() -> Result<Verdict> {
    let g = curved_metric(48);
    let grid = *g.grid();
    let state = CoupledState::new(g, ScalarField::zeros(grid), 0.0)?;
    let rates = rhs_unnormalized(&state, 0.0)?;
    let (_, s) = coupling_tensors(&state.g, &state.phi, 0.0)?;
    let expected = -integrate(&s, &state.g)?;
    let fd = |dt: f64| -> Result<f64> {
        let vp = volume(&state.g.advanced(dt, &rates.metric)?);
        let vm = volume(&state.g.advanced(-dt, &rates.metric)?);
        Ok((vp - vm) / (2.0 * dt))
    };
    let err_half = (fd(5e-6)? - expected).abs();
    Ok(Verdict::pass_fail(
        "volume-rate-identity",
        0.02 * expected.abs().max(1e-12) - err_half,
        format!("dVol/dt expected {expected:.6e}"),
    ))
}

/// S_min(t) >= y(t) - tol along a stock unnormalized run.
fn comparison_bound_stock_run() -> Result<Verdict> {
    let grid = Grid::torus(32, 2.0 * PI, 2.0 * PI).unwrap();
    let u0 = ScalarField::from_fn(grid, |x, _| 0.2 * x.cos());
    let g = MetricField::conformal(&u0)?;
    let state = CoupledState::new(g, ScalarField::zeros(grid), 0.0)?;
    let mut flow = FlowConfig::new(0.0, false, 0.05)?;
    flow.records = 5;
    let eigen = EigenParams::new(2.0, 2.0, 0.0)?;
    let trace = run_trace(&state, &flow, &eigen)?;
    let s0 = trace[0].s_min;
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    for rec in &trace {
        let y = comparison_bound_y(rec.t, s0, 2)?;
        let margin = rec.s_min - y + 1e-3 * (1.0 + y.abs());
        if margin < worst {
            worst = margin;
            at = rec.t;
        }
    }
    Ok(Verdict::pass_fail("comparison-bound-stock-run", worst, format!("t = {at}")))
}

pub fn invariant_suite() -> Result<Vec<Verdict>> {
    Ok(vec![
        divergence_theorem()?,
        scaling_laws()?,
        continuity_on_homothety()?,
        gradient_derivative_identity()?,
        volume_rate_identity()?,
        comparison_bound_stock_run()?,
    ])
}
