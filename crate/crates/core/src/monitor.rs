//! Couples the flow integrator with the eigensolver: produces eigenvalue
//! traces along a flow and checks every claimed inequality and monotone
//! quantity — the positivity condition on S - (S/k)g, the variation formula
//! against finite differences, the integrated lower bound, the monotone
//! quantity Q(t), the metric-continuity bound, and the surface hypotheses.

use crate::diffgeo::{
    coupling_tensors, grad_norm_sq, integrate, ricci_and_scalar, volume, MetricField, ScalarField,
    SymTensorField,
};
use crate::error::{Error, Result};
use crate::geomflow::{
    average_r, einstein_c, einstein_s, step_by, CoupledState, EinsteinParams, FlowConfig,
};
use crate::pqeigen::{first_eigenpair, EigenPair, EigenParams};
use crate::scalar::{real, Real};

/// One recorded instant of a flow + eigensolve trace. Mirrors the CSV row
/// layout emitted by the CLI.
#[derive(Clone, Debug)]
pub struct TraceRecord<T> {
    pub t: T,
    pub lambda: T,
    pub s_min: T,
    pub volume: T,
    pub r: T,
    /// Global minimum generalized eigenvalue of S - (S/k)g with respect to g.
    pub cond_min: T,
    /// Monotone quantity lambda(t) (1 - (2/m) S_min(0) t)^{m/2}.
    pub q_mono: T,
    /// Predicted d lambda / dt from the variation formula (normalized variant
    /// when the flow is normalized).
    pub g_formula: T,
    /// Central-difference d lambda / dt across adjacent records.
    pub dlambda_fd: T,
    pub eig_iters: usize,
    pub eig_residual: T,
    /// Eigensolve did not converge; excluded from all verdicts.
    pub degraded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses not met (or check not applicable): reported, not asserted.
    Info,
}

/// Outcome of one check: worst margin is >= 0 exactly when the check passes.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub margin: f64,
    pub location: String,
}

impl Verdict {
    pub fn pass_fail(name: &str, margin: f64, location: String) -> Self {
        let status = if margin >= 0.0 { Status::Pass } else { Status::Fail };
        Verdict { name: name.into(), status, margin, location }
    }

    pub fn info(name: &str, margin: f64, location: String) -> Self {
        Verdict { name: name.into(), status: Status::Info, margin, location }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

fn max_gen_eig<T: Real>(g: &MetricField<T>, t: &SymTensorField<T>, k: usize) -> T {
    let mut neg = t.clone();
    neg.scale(-T::one());
    -g.min_gen_eig(&neg, k)
}

/// Global minimum over nodes of the least generalized eigenvalue of
/// T = S_tensor - (S/k) g with respect to g; the positivity condition of the
/// monotonicity theorems holds iff this is >= 0.
pub fn condition_tensor_min<T: Real>(state: &CoupledState<T>, kappa: T, k: T) -> Result<T> {
    if k <= T::zero() {
        return Err(Error::InvalidParam("exponent k must be positive".into()));
    }
    let (s_tensor, s_scalar) = coupling_tensors(&state.g, &state.phi, kappa)?;
    let grid = *state.g.grid();
    let mut t = s_tensor;
    let gt = state.g.tensor();
    for node in 0..grid.nodes() {
        let c = s_scalar.values()[node] / k;
        t.xx[node] -= c * gt.xx[node];
        t.xy[node] -= c * gt.xy[node];
        t.yy[node] -= c * gt.yy[node];
    }
    let mut min = T::infinity();
    for node in 0..grid.nodes() {
        min = min.min(state.g.min_gen_eig(&t, node));
    }
    Ok(min)
}

fn pointwise_weight<T: Real>(pair: &EigenPair<T>, a: T, b: T) -> ScalarField<T> {
    pair.u.zip(&pair.v, |x, y| x.abs().powf(a) * y.abs().powf(b))
}

/// The five-integral variation formula: predicted d lambda / dt of the first
/// eigenvalue under the unnormalized flow, evaluated on a converged pair:
///
///   lambda int S w u v  +  (a+1) int S(grad u, grad u)|grad u|^{p-2}
///   - ((a+1)/p) int |grad u|^p S  + the (b+1, q, v) counterparts,
///
/// with w = |u|^a |v|^b and all integrals against dmu of the current metric.
pub fn variation_formula_g<T: Real>(
    state: &CoupledState<T>,
    pair: &EigenPair<T>,
    kappa: T,
    params: &EigenParams<T>,
) -> Result<T> {
    let g = &state.g;
    if pair.u.grid() != g.grid() {
        return Err(Error::GridMismatch("variation formula: pair and state"));
    }
    let (s_tensor, s_scalar) = coupling_tensors(g, &state.phi, kappa)?;
    let one = T::one();
    let half = real::<T>(0.5);

    let w = pointwise_weight(pair, params.a(), params.b());
    let pairing = w
        .zip(&pair.u, |wk, uk| wk * uk)
        .zip(&pair.v, |x, vk| x * vk)
        .zip(&s_scalar, |x, sk| x * sk);
    let term_weight = pair.lambda * integrate(&pairing, g)?;

    let mut acc = term_weight;
    for (field, exp, coef) in
        [(&pair.u, params.p(), params.a() + one), (&pair.v, params.q(), params.b() + one)]
    {
        let grid = *g.grid();
        let gn = grad_norm_sq(field, g)?;
        let d2 = params.delta * params.delta;
        let mut directional = ScalarField::zeros(grid);
        let mut energy_density = ScalarField::zeros(grid);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let k = grid.idx(i, j);
                let dx = field.centered(i, j, 0);
                let dy = field.centered(i, j, 1);
                let gx = g.inv_xx()[k] * dx + g.inv_xy()[k] * dy;
                let gy = g.inv_xy()[k] * dx + g.inv_yy()[k] * dy;
                let weight = (gn.values()[k] + d2).powf((exp - real::<T>(2.0)) * half);
                directional.values_mut()[k] = s_tensor.quad(k, gx, gy) * weight;
                energy_density.values_mut()[k] =
                    gn.values()[k].max(T::zero()).powf(exp * half) * s_scalar.values()[k];
            }
        }
        acc += coef * integrate(&directional, g)?;
        acc -= coef / exp * integrate(&energy_density, g)?;
    }
    Ok(acc)
}

/// Normalized-flow variant: the unnormalized formula minus
/// ((a+1)/m) r int |grad u|^p + ((b+1)/m) r int |grad v|^q.
pub fn variation_formula_g_normalized<T: Real>(
    state: &CoupledState<T>,
    pair: &EigenPair<T>,
    kappa: T,
    params: &EigenParams<T>,
) -> Result<T> {
    let base = variation_formula_g(state, pair, kappa, params)?;
    let r = average_r(state, kappa)?;
    let m = real::<T>(state.g.grid().dim() as f64);
    let one = T::one();
    let half = real::<T>(0.5);
    let mut acc = base;
    for (field, exp, coef) in
        [(&pair.u, params.p(), params.a() + one), (&pair.v, params.q(), params.b() + one)]
    {
        let gn = grad_norm_sq(field, &state.g)?;
        let density = gn.map(|x| x.max(T::zero()).powf(exp * half));
        acc -= coef / m * r * integrate(&density, &state.g)?;
    }
    Ok(acc)
}

/// Q(t) = lambda (1 - (2/m) S_min(0) t)^{m/2}; for m = 2 exactly
/// (1 - S_min(0) t) lambda.
pub fn monotone_quantity<T: Real>(lambda: T, t: T, s_min0: T, m: usize) -> T {
    let mf = real::<T>(m as f64);
    let base = T::one() - (s_min0 + s_min0) / mf * t;
    lambda * base.powf(mf * real::<T>(0.5))
}

fn active<T: Real>(trace: &[TraceRecord<T>]) -> impl Iterator<Item = &TraceRecord<T>> {
    trace.iter().filter(|r| !r.degraded)
}

/// Integrated lower bound lambda(t1) >= lambda(t0) + int_{t0}^{t1} G dtau,
/// checked by trapezoid quadrature over every pair of records within a
/// degradation-free segment; tol = 1e-2 (1 + |lambda(t1)|).
pub fn integrated_lower_bound_check<T: Real>(trace: &[TraceRecord<T>]) -> Verdict {
    let name = "integrated-lower-bound";
    let mut worst = f64::INFINITY;
    let mut loc = String::from("-");
    let mut checked = false;
    let mut seg_start = 0usize;
    for end in 0..=trace.len() {
        let boundary = end == trace.len() || trace[end].degraded;
        if boundary {
            let seg = &trace[seg_start..end];
            if seg.len() >= 2 {
                // cumulative trapezoid of G over the segment
                let mut cum = vec![0.0f64; seg.len()];
                for i in 1..seg.len() {
                    let dt = (seg[i].t - seg[i - 1].t).to_f64_lossy();
                    let avg =
                        0.5 * (seg[i].g_formula.to_f64_lossy() + seg[i - 1].g_formula.to_f64_lossy());
                    cum[i] = cum[i - 1] + dt * avg;
                }
                for i in 0..seg.len() {
                    for j in (i + 1)..seg.len() {
                        let lam0 = seg[i].lambda.to_f64_lossy();
                        let lam1 = seg[j].lambda.to_f64_lossy();
                        let tol = 1e-2 * (1.0 + lam1.abs());
                        let margin = lam1 - lam0 - (cum[j] - cum[i]) + tol;
                        checked = true;
                        if margin < worst {
                            worst = margin;
                            loc = format!("t in [{}, {}]", seg[i].t.to_f64_lossy(), seg[j].t.to_f64_lossy());
                        }
                    }
                }
            }
            seg_start = end + 1;
        }
    }
    if !checked {
        return Verdict::info(name, 0.0, "fewer than 2 usable records".into());
    }
    Verdict::pass_fail(name, worst, loc)
}

/// Which column a monotonicity verdict inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotoneTarget {
    Lambda,
    Q,
}

/// Nondecreasing check with slack tol_mono = 1e-3 (1 + max |value|), gated on
/// the theorem hypotheses (condition tensor nonnegative along the trace and
/// S_min(0) >= 0): when they fail the verdict is informational.
pub fn monotonicity_verdict<T: Real>(trace: &[TraceRecord<T>], which: MonotoneTarget) -> Verdict {
    let name = match which {
        MonotoneTarget::Lambda => "lambda-nondecreasing",
        MonotoneTarget::Q => "Q-nondecreasing",
    };
    let recs: Vec<&TraceRecord<T>> = active(trace).collect();
    if recs.len() < 2 {
        return Verdict::info(name, 0.0, "fewer than 2 usable records".into());
    }
    let gate = 1e-9;
    let hyp_cond = recs.iter().all(|r| r.cond_min.to_f64_lossy() >= -gate);
    let hyp_smin0 = recs[0].s_min.to_f64_lossy() >= -gate;
    let value = |r: &TraceRecord<T>| match which {
        MonotoneTarget::Lambda => r.lambda.to_f64_lossy(),
        MonotoneTarget::Q => r.q_mono.to_f64_lossy(),
    };
    let vmax = recs.iter().map(|r| value(r).abs()).fold(0.0f64, f64::max);
    let tol = 1e-3 * (1.0 + vmax);
    let mut worst = f64::INFINITY;
    let mut loc = String::from("-");
    for w in recs.windows(2) {
        let margin = value(w[1]) - value(w[0]) + tol;
        if margin < worst {
            worst = margin;
            loc = format!("t = {}", w[1].t.to_f64_lossy());
        }
    }
    if !(hyp_cond && hyp_smin0) {
        let why = if hyp_cond { "S_min(0) < 0" } else { "condition tensor indefinite" };
        return Verdict::info(name, worst, format!("hypothesis not met ({why}); worst at {loc}"));
    }
    Verdict::pass_fail(name, worst, loc)
}

/// Metric-continuity bound: with g2 pinched between (1+eps)^{-1} g1 and
/// (1+eps) g1 pointwise, checks
/// lambda(g2) - lambda(g1) <= ((1+eps)^{(p+m)/2} - (1+eps)^{-m/2}) lambda(g1)
/// with slack 10 tol_kkt (1 + lambda(g1)). Pinching violations are a
/// precondition error naming the worst node.
pub fn lemma_continuity_check<T: Real>(
    g1: &MetricField<T>,
    g2: &MetricField<T>,
    eps: T,
    params: &EigenParams<T>,
) -> Result<Verdict> {
    if g1.grid() != g2.grid() {
        return Err(Error::GridMismatch("continuity check metrics"));
    }
    if eps <= T::zero() {
        return Err(Error::InvalidParam("pinching epsilon must be positive".into()));
    }
    let one = T::one();
    let lo = one / (one + eps);
    let hi = one + eps;
    let mut worst_node = 0usize;
    let mut worst_excess = T::zero();
    for k in 0..g1.grid().nodes() {
        let mn = g1.min_gen_eig(g2.tensor(), k);
        let mx = max_gen_eig(g1, g2.tensor(), k);
        let excess = (lo - mn).max(mx - hi);
        if excess > worst_excess {
            worst_excess = excess;
            worst_node = k;
        }
    }
    if worst_excess > T::zero() {
        return Err(Error::Precondition(format!(
            "pinching violated at node {worst_node} by {}",
            worst_excess.to_f64_lossy()
        )));
    }
    let p1 = first_eigenpair(g1, params, None)?;
    let p2 = first_eigenpair(g2, params, None)?;
    let m = real::<T>(g1.grid().dim() as f64);
    let half = real::<T>(0.5);
    let bound = (hi.powf((params.p() + m) * half) - hi.powf(-m * half)) * p1.lambda;
    let slack = real::<T>(10.0) * params.tol_kkt * (one + p1.lambda.abs());
    let margin = (bound + slack - (p2.lambda - p1.lambda)).to_f64_lossy();
    Ok(Verdict::pass_fail(
        "continuity-bound",
        margin,
        format!("lambda(g1) = {}, lambda(g2) = {}", p1.lambda.to_f64_lossy(), p2.lambda.to_f64_lossy()),
    ))
}

/// The two pointwise hypotheses of the dimension-two proposition, evaluated
/// as informational verdicts: (1) Ric >= eps dphi (x) dphi with
/// eps = 2 kappa (k-1)/(k-2) (needs k > 2), and (2) the quadratic-form
/// reading |grad phi|^2 g >= k dphi (x) dphi.
pub fn surface_hypothesis_checks<T: Real>(
    state: &CoupledState<T>,
    kappa: T,
    k: T,
) -> Result<(Verdict, Verdict)> {
    let g = &state.g;
    let grid = *g.grid();
    let two = real::<T>(2.0);
    let (ric, _) = ricci_and_scalar(g)?;
    let gn = grad_norm_sq(&state.phi, g)?;

    let mut dphi = SymTensorField::zeros(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let node = grid.idx(i, j);
            let px = state.phi.centered(i, j, 0);
            let py = state.phi.centered(i, j, 1);
            dphi.xx[node] = px * px;
            dphi.xy[node] = px * py;
            dphi.yy[node] = py * py;
        }
    }

    let first = if k > two {
        let eps = two * kappa * (k - T::one()) / (k - two);
        let mut t = ric;
        t.axpy(-eps, &dphi);
        let mut min = T::infinity();
        let mut at = 0usize;
        for node in 0..grid.nodes() {
            let mu = g.min_gen_eig(&t, node);
            if mu < min {
                min = mu;
                at = node;
            }
        }
        Verdict::info("surface-hyp-ricci", min.to_f64_lossy(), format!("node {at}"))
    } else {
        Verdict::info("surface-hyp-ricci", 0.0, "not applicable: k <= 2".into())
    };

    let mut t2 = dphi;
    t2.scale(-k);
    for node in 0..grid.nodes() {
        let c = gn.values()[node];
        let gt = g.tensor();
        t2.xx[node] += c * gt.xx[node];
        t2.xy[node] += c * gt.xy[node];
        t2.yy[node] += c * gt.yy[node];
    }
    let mut min = T::infinity();
    let mut at = 0usize;
    for node in 0..grid.nodes() {
        let mu = g.min_gen_eig(&t2, node);
        if mu < min {
            min = mu;
            at = node;
        }
    }
    let second = Verdict::info("surface-hyp-gradient", min.to_f64_lossy(), format!("node {at}"));
    Ok((first, second))
}

/// Evolves the coupled state to each record time (landing exactly via a step
/// cap), solves the eigenproblem with warm starts, and fills every monitor
/// column. Central differences of lambda over adjacent records give
/// dlambda_fd; non-converged eigensolves mark the record degraded.
pub fn run_trace<T: Real>(
    state0: &CoupledState<T>,
    flow: &FlowConfig<T>,
    eigen: &EigenParams<T>,
) -> Result<Vec<TraceRecord<T>>> {
    flow.validate()?;
    let m = state0.g.grid().dim();
    let k = eigen.k_min();
    let dt_rec = flow.t_end / real::<T>(flow.records as f64);
    let tiny = real::<T>(1e-12) * flow.t_end;

    let mut state = state0.clone();
    let mut warm: Option<(ScalarField<T>, ScalarField<T>)> = None;
    let mut records = Vec::with_capacity(flow.records + 1);
    let mut s_min0 = T::zero();

    for rec in 0..=flow.records {
        let t_target = state0.t + dt_rec * real::<T>(rec as f64);
        let mut guard = 0usize;
        while state.t < t_target - tiny {
            state = step_by(&state, flow, t_target - state.t)?;
            guard += 1;
            if guard > 2_000_000 {
                return Err(Error::SolverFailure("flow stalled before record time".into()));
            }
        }

        let pair = first_eigenpair(&state.g, eigen, warm.as_ref().map(|(u, v)| (u, v)))?;
        let s = crate::geomflow::s_min(&state, flow.kappa)?;
        if rec == 0 {
            s_min0 = s;
        }
        let g_val = if flow.normalized {
            variation_formula_g_normalized(&state, &pair, flow.kappa, eigen)?
        } else {
            variation_formula_g(&state, &pair, flow.kappa, eigen)?
        };
        let record = TraceRecord {
            t: state.t,
            lambda: pair.lambda,
            s_min: s,
            volume: volume(&state.g),
            r: average_r(&state, flow.kappa)?,
            cond_min: condition_tensor_min(&state, flow.kappa, k)?,
            q_mono: monotone_quantity(pair.lambda, state.t - state0.t, s_min0, m),
            g_formula: g_val,
            dlambda_fd: T::zero(),
            eig_iters: pair.iterations,
            eig_residual: pair.kkt_residual,
            degraded: !pair.converged,
        };
        if !record.lambda.is_finite() || !record.s_min.is_finite() {
            return Err(Error::NonFinite("trace record"));
        }
        if pair.converged {
            warm = Some((pair.u, pair.v));
        }
        records.push(record);
    }

    // q_mono above used the provisional s_min0 of record 0 for all rows;
    // recompute now that it is fixed, then finite-difference lambda.
    for rec in records.iter_mut() {
        rec.q_mono = monotone_quantity(rec.lambda, rec.t - state0.t, s_min0, m);
    }
    let n = records.len();
    for i in 0..n {
        let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
        if hi > lo {
            records[i].dlambda_fd =
                (records[hi].lambda - records[lo].lambda) / (records[hi].t - records[lo].t);
        }
    }
    Ok(records)
}

/// Exact trace of the homothetic Einstein family g(t) = c(t) g0 with
/// c(t) = (-2a + 2 kappa) t + 1: every column evaluated in closed form.
/// The analytic d lambda / dt equals the variation-formula value
/// p (a - kappa) lambda / c.
pub fn einstein_trace<T: Real>(
    params: &EinsteinParams<T>,
    lambda0: T,
    vol0: T,
    records: usize,
    t_end: T,
) -> Result<Vec<TraceRecord<T>>> {
    if records == 0 || t_end <= T::zero() {
        return Err(Error::InvalidParam("einstein trace needs records >= 1, t_end > 0".into()));
    }
    if lambda0 <= T::zero() || vol0 <= T::zero() {
        return Err(Error::InvalidParam("lambda0 and vol0 must be positive".into()));
    }
    let mf = real::<T>(params.m as f64);
    let half = real::<T>(0.5);
    let k = params.p; // p = q for the analytic family
    let s_min0 = (params.a - params.kappa) * mf;
    let mut out = Vec::with_capacity(records + 1);
    for rec in 0..=records {
        let t = t_end * real::<T>(rec as f64) / real::<T>(records as f64);
        let c = einstein_c(t, params)?;
        let s = einstein_s(t, params)?;
        let lambda = lambda0 * c.powf(-params.p * half);
        let cond = (params.a - params.kappa) / c * (T::one() - mf / k);
        let g_val = params.p * (params.a - params.kappa) * lambda / c;
        out.push(TraceRecord {
            t,
            lambda,
            s_min: s,
            volume: vol0 * c.powf(mf * half),
            r: s,
            cond_min: cond,
            q_mono: monotone_quantity(lambda, t, s_min0, params.m),
            g_formula: g_val,
            dlambda_fd: g_val,
            eig_iters: 0,
            eig_residual: T::zero(),
            degraded: false,
        });
    }
    Ok(out)
}
