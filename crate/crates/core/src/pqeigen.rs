//! First eigenvalue of the coupled (p,q)-Laplacian system by constrained
//! minimization of the energy A subject to the pairing normalization B = 1
//! and the two weighted zero-mean constraints.
//!
//! The iteration moves (u, v) along the KKT residual direction (the
//! Lagrangian gradient with multiplier lambda = A), re-projects the
//! zero-mean constraints by weighted constant shifts, and restores B = 1 by
//! the closed-form two-parameter rescale minimizing A on the scaling orbit.
//! Step sizes come from a Barzilai-Borwein estimate guarded by Armijo
//! backtracking, so A is non-increasing across accepted steps.

use crate::diffgeo::{
    integrate, l2_norm, p_dirichlet_energy, p_laplacian, MetricField, ScalarField,
};
use crate::error::{Error, Result};
use crate::geomflow::CoupledState;
use crate::scalar::{real, Real};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Exponents and solver knobs for the coupled eigenproblem. Construction
/// takes (p, q, a) and derives b from the homogeneity balance
/// (a+1)/p + (b+1)/q = 1, rejecting negative b.
#[derive(Clone, Copy, Debug)]
pub struct EigenParams<T> {
    p: T,
    q: T,
    a: T,
    b: T,
    pub delta: T,
    pub tol_kkt: T,
    pub max_iters: usize,
    pub seed: u64,
}

impl<T: Real> EigenParams<T> {
    pub fn new(p: T, q: T, a: T) -> Result<Self> {
        if p <= T::one() || q <= T::one() {
            return Err(Error::InvalidParam("exponents p, q must exceed 1".into()));
        }
        if a < T::zero() {
            return Err(Error::InvalidParam("weight exponent a must be nonnegative".into()));
        }
        let b = q * (T::one() - (a + T::one()) / p) - T::one();
        if b < T::zero() {
            return Err(Error::InvalidParam(format!(
                "derived weight exponent b = {} < 0",
                b.to_f64_lossy()
            )));
        }
        let params = EigenParams {
            p,
            q,
            a,
            b,
            delta: real::<T>(1e-8),
            tol_kkt: real::<T>(1e-6),
            max_iters: 50_000,
            seed: 0,
        };
        debug_assert!(params.exponent_residual() <= real::<T>(1e-12));
        Ok(params)
    }

    /// Symmetric helper: p = q and a = b = p/2 - 1, the scalar p-Laplacian
    /// reduction.
    pub fn symmetric(p: T) -> Result<Self> {
        Self::new(p, p, p * real::<T>(0.5) - T::one())
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn k_min(&self) -> T {
        self.p.min(self.q)
    }

    /// |(a+1)/p + (b+1)/q - 1|, zero by construction up to round-off.
    pub fn exponent_residual(&self) -> T {
        ((self.a + T::one()) / self.p + (self.b + T::one()) / self.q - T::one()).abs()
    }

    pub fn with_delta(mut self, delta: T) -> Result<Self> {
        if delta < T::zero() {
            return Err(Error::InvalidParam("delta must be nonnegative".into()));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tol: T, max_iters: usize) -> Self {
        self.tol_kkt = tol;
        self.max_iters = max_iters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A converged (or best-effort) eigen triple with diagnostics.
#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    pub lambda: T,
    pub u: ScalarField<T>,
    pub v: ScalarField<T>,
    /// Max of the L^2(dmu) norms of the two system residuals.
    pub kkt_residual: T,
    /// Scale lambda * max(||u||, ||v||) the stopping test is relative to.
    pub kkt_scale: T,
    /// (|B - 1|, |C_u|, |C_v|).
    pub constraint_residuals: [T; 3],
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

/// Energy A(u,v) = ((a+1)/p) int |grad u|^p dmu + ((b+1)/q) int |grad v|^q dmu.
pub fn functional_a<T: Real>(
    u: &ScalarField<T>,
    v: &ScalarField<T>,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<T> {
    let eu = p_dirichlet_energy(u, g, params.p, T::zero())?;
    let ev = p_dirichlet_energy(v, g, params.q, T::zero())?;
    Ok((params.a + T::one()) / params.p * eu + (params.b + T::one()) / params.q * ev)
}

fn weight<T: Real>(u: &ScalarField<T>, v: &ScalarField<T>, a: T, b: T) -> ScalarField<T> {
    u.zip(v, |x, y| x.abs().powf(a) * y.abs().powf(b))
}

/// Pairing B(u,v) = int |u|^a |v|^b u v dmu.
pub fn functional_b<T: Real>(
    u: &ScalarField<T>,
    v: &ScalarField<T>,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<T> {
    let w = weight(u, v, params.a, params.b);
    let integrand = w.zip(u, |wk, uk| wk * uk).zip(v, |x, vk| x * vk);
    integrate(&integrand, g)
}

/// The two weighted zero-mean constraints
/// C_u = int |u|^a |v|^b v dmu, C_v = int |u|^a |v|^b u dmu.
pub fn zero_mean_constraints<T: Real>(
    u: &ScalarField<T>,
    v: &ScalarField<T>,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<(T, T)> {
    let w = weight(u, v, params.a, params.b);
    let cu = integrate(&w.zip(v, |wk, vk| wk * vk), g)?;
    let cv = integrate(&w.zip(u, |wk, uk| wk * uk), g)?;
    Ok((cu, cv))
}

/// System residuals r_u = Delta_p u + lambda |u|^a |v|^b v and
/// r_v = Delta_q v + lambda |u|^a |v|^b u with the delta-regularized
/// operators; returns the max of the two L^2(dmu) norms.
pub fn kkt_residual<T: Real>(
    u: &ScalarField<T>,
    v: &ScalarField<T>,
    lambda: T,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<T> {
    let (ru, rv) = kkt_residual_fields(u, v, lambda, g, params)?;
    Ok(l2_norm(&ru, g)?.max(l2_norm(&rv, g)?))
}

fn kkt_residual_fields<T: Real>(
    u: &ScalarField<T>,
    v: &ScalarField<T>,
    lambda: T,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let w = weight(u, v, params.a, params.b);
    let mut ru = p_laplacian(u, g, params.p, params.delta)?;
    let mut rv = p_laplacian(v, g, params.q, params.delta)?;
    for k in 0..u.grid().nodes() {
        ru.values_mut()[k] += lambda * w.values()[k] * v.values()[k];
        rv.values_mut()[k] += lambda * w.values()[k] * u.values()[k];
    }
    Ok((ru, rv))
}

/// First-order zero-mean projection: weighted constant shifts of u and v,
/// iterated to round-off.
fn project_zero_mean<T: Real>(
    u: &mut ScalarField<T>,
    v: &mut ScalarField<T>,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<()> {
    let one = T::one();
    for _ in 0..40 {
        let w = weight(u, v, params.a, params.b);
        let w_int = integrate(&w, g)?;
        if w_int <= T::epsilon() {
            return Ok(()); // degenerate weight; rescale step will catch it
        }
        let cu = integrate(&w.zip(v, |wk, vk| wk * vk), g)?;
        let cv = integrate(&w.zip(u, |wk, uk| wk * uk), g)?;
        let scale = T::epsilon() * w_int * (u.max_abs() + v.max_abs() + one);
        if cu.abs() <= scale && cv.abs() <= scale {
            break;
        }
        let dv = cu / ((params.b + one) * w_int);
        let du = cv / ((params.a + one) * w_int);
        for x in v.values_mut() {
            *x -= dv;
        }
        for x in u.values_mut() {
            *x -= du;
        }
    }
    Ok(())
}

/// Rescale (u, v) -> (s u, t v) with the unique s, t > 0 minimizing A
/// subject to s^{a+1} t^{b+1} B = 1. Returns false when B <= 0 or a field
/// is gradient-free (restart condition).
fn rescale_to_unit_b<T: Real>(
    u: &mut ScalarField<T>,
    v: &mut ScalarField<T>,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<bool> {
    let one = T::one();
    let b_val = functional_b(u, v, g, params)?;
    if !(b_val > T::zero()) {
        return Ok(false);
    }
    let au = (params.a + one) / params.p * p_dirichlet_energy(u, g, params.p, params.delta)?;
    let av = (params.b + one) / params.q * p_dirichlet_energy(v, g, params.q, params.delta)?;
    if !(au > T::zero() && av > T::zero()) {
        return Ok(false);
    }
    // stationarity of s^p au + t^q av on the orbit: t^q = C s^p
    let c = params.p * au * (params.b + one) / (params.q * av * (params.a + one));
    let x = one / (b_val * c.powf((params.b + one) / params.q));
    let y = x * c;
    let s = x.powf(one / params.p);
    let t = y.powf(one / params.q);
    if !(s.is_finite() && t.is_finite() && s > T::zero() && t > T::zero()) {
        return Ok(false);
    }
    u.scale(s);
    v.scale(t);
    Ok(true)
}

fn default_init<T: Real>(g: &MetricField<T>) -> ScalarField<T> {
    let grid = *g.grid();
    let two_pi = real::<T>(std::f64::consts::TAU);
    let l1 = grid.length(0);
    ScalarField::from_fn(grid, |x, _| (two_pi * x / l1).sin())
}

fn random_init<T: Real>(g: &MetricField<T>, rng: &mut ChaCha8Rng) -> ScalarField<T> {
    let grid = *g.grid();
    let two_pi = real::<T>(std::f64::consts::TAU);
    let l1 = grid.length(0);
    let l2 = grid.length(1);
    let mut coef = [[0.0f64; 4]; 3];
    for row in coef.iter_mut() {
        for c in row.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        let mut acc = T::zero();
        for (kidx, row) in coef.iter().enumerate() {
            let k = real::<T>((kidx + 1) as f64);
            let tx = two_pi * k * x / l1;
            let ty = two_pi * k * y / l2;
            acc += real::<T>(row[0]) * tx.sin()
                + real::<T>(row[1]) * tx.cos()
                + real::<T>(row[2]) * ty.sin()
                + real::<T>(row[3]) * (tx + ty).sin();
        }
        acc
    })
}

struct Workspace<T> {
    u: ScalarField<T>,
    v: ScalarField<T>,
}

fn projected<T: Real>(
    u: &ScalarField<T>,
    v: &ScalarField<T>,
    step: T,
    du: &ScalarField<T>,
    dv: &ScalarField<T>,
    g: &MetricField<T>,
    params: &EigenParams<T>,
) -> Result<Option<Workspace<T>>> {
    let mut ut = u.clone();
    let mut vt = v.clone();
    ut.axpy(step, du);
    vt.axpy(step, dv);
    project_zero_mean(&mut ut, &mut vt, g, params)?;
    if !rescale_to_unit_b(&mut ut, &mut vt, g, params)? {
        return Ok(None);
    }
    if !ut.is_finite() || !vt.is_finite() {
        return Err(Error::NonFinite("eigensolver iterate"));
    }
    Ok(Some(Workspace { u: ut, v: vt }))
}

fn dmu_inner<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>, g: &MetricField<T>) -> Result<T> {
    integrate(&a.zip(b, |x, y| x * y), g)
}

/// Constrained minimization of A: returns the first eigen triple of the
/// coupled system on (grid, g). Deterministic for fixed params and inputs.
pub fn first_eigenpair<T: Real>(
    g: &MetricField<T>,
    params: &EigenParams<T>,
    warm_start: Option<(&ScalarField<T>, &ScalarField<T>)>,
) -> Result<EigenPair<T>> {
    if let Some((wu, wv)) = warm_start {
        if wu.grid() != g.grid() || wv.grid() != g.grid() {
            return Err(Error::GridMismatch("warm start fields"));
        }
    }
    let one = T::one();
    let grid = *g.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let init = |rng: &mut ChaCha8Rng, attempt: usize| -> (ScalarField<T>, ScalarField<T>) {
        if attempt == 0 {
            match warm_start {
                Some((wu, wv)) => (wu.clone(), wv.clone()),
                None => {
                    let u = default_init(g);
                    (u.clone(), u)
                }
            }
        } else {
            let u = random_init(g, rng);
            let v = u.clone();
            (u, v)
        }
    };

    let mut restarts = 0usize;
    let mut attempt = 0usize;
    'restart: loop {
        let (mut u, mut v) = init(&mut rng, attempt);
        project_zero_mean(&mut u, &mut v, g, params)?;
        if !rescale_to_unit_b(&mut u, &mut v, g, params)? {
            restarts += 1;
            attempt += 1;
            if restarts > 3 {
                return Err(Error::SolverFailure(
                    "B(u,v) <= 0 after 3 restarts from fresh initializations".into(),
                ));
            }
            continue 'restart;
        }

        let h_min = if grid.dim() == 2 { grid.h(0).min(grid.h(1)) } else { grid.h(0) };
        let eta0 = real::<T>(0.45) * h_min * h_min / g.max_inv_norm().max(T::epsilon());
        let mut eta = eta0;
        let mut prev: Option<(ScalarField<T>, ScalarField<T>, ScalarField<T>, ScalarField<T>)> =
            None;
        let mut iterations = 0usize;

        for iter in 0..params.max_iters {
            iterations = iter;
            let lambda = functional_a(&u, &v, g, params)?;
            let (ru, rv) = kkt_residual_fields(&u, &v, lambda, g, params)?;
            let res = l2_norm(&ru, g)?.max(l2_norm(&rv, g)?);
            let scale = (lambda.abs() * l2_norm(&u, g)?.max(l2_norm(&v, g)?)).max(T::epsilon());
            if res <= params.tol_kkt * scale {
                break;
            }
            // Lagrangian descent direction
            let du = ru.map(|x| (params.a + one) * x);
            let dv = rv.map(|x| (params.b + one) * x);

            // Barzilai-Borwein step from the previous accepted move
            if let Some((pu, pv, pdu, pdv)) = &prev {
                let su = u.zip(pu, |x, y| x - y);
                let sv = v.zip(pv, |x, y| x - y);
                let yu = du.zip(pdu, |x, y| x - y);
                let yv = dv.zip(pdv, |x, y| x - y);
                let ss = dmu_inner(&su, &su, g)? + dmu_inner(&sv, &sv, g)?;
                // direction is an ascent move u + eta*du, so curvature pairs with -y
                let sy = -(dmu_inner(&su, &yu, g)? + dmu_inner(&sv, &yv, g)?);
                if sy > T::epsilon() * ss.max(T::epsilon()) {
                    eta = (ss / sy).min(eta0 * real::<T>(1e4)).max(eta0 * real::<T>(1e-6));
                } else {
                    eta = eta0;
                }
            }

            let a_old = {
                // delta-regularized energy for the monotone line search
                let eu = p_dirichlet_energy(&u, g, params.p, params.delta)?;
                let ev = p_dirichlet_energy(&v, g, params.q, params.delta)?;
                (params.a + one) / params.p * eu + (params.b + one) / params.q * ev
            };
            let gnorm2 = dmu_inner(&ru, &ru, g)? + dmu_inner(&rv, &rv, g)?;
            let armijo = real::<T>(1e-4);

            let mut step = eta;
            let mut accepted = None;
            for _ in 0..50 {
                match projected(&u, &v, step, &du, &dv, g, params)? {
                    Some(ws) => {
                        let eu = p_dirichlet_energy(&ws.u, g, params.p, params.delta)?;
                        let ev = p_dirichlet_energy(&ws.v, g, params.q, params.delta)?;
                        let a_new = (params.a + one) / params.p * eu
                            + (params.b + one) / params.q * ev;
                        if a_new <= a_old - armijo * step * gnorm2 {
                            accepted = Some(ws);
                            break;
                        }
                    }
                    None => {
                        // pairing became non-positive along this step
                    }
                }
                step = step * real::<T>(0.5);
            }

            match accepted {
                Some(ws) => {
                    prev = Some((u, v, du, dv));
                    u = ws.u;
                    v = ws.v;
                    eta = step;
                }
                None => {
                    // line search exhausted: either restart on a dead pairing
                    // or stop at the current best point
                    let probe = projected(&u, &v, eta0 * real::<T>(1e-8), &du, &dv, g, params)?;
                    if probe.is_none() {
                        restarts += 1;
                        attempt += 1;
                        if restarts > 3 {
                            return Err(Error::SolverFailure(
                                "pairing B collapsed during descent; restarts exhausted".into(),
                            ));
                        }
                        continue 'restart;
                    }
                    break;
                }
            }
        }

        let lambda = functional_a(&u, &v, g, params)?;
        let res = kkt_residual(&u, &v, lambda, g, params)?;
        let scale = (lambda.abs() * l2_norm(&u, g)?.max(l2_norm(&v, g)?)).max(T::epsilon());
        let b_val = functional_b(&u, &v, g, params)?;
        let (cu, cv) = zero_mean_constraints(&u, &v, g, params)?;
        if !lambda.is_finite() {
            return Err(Error::NonFinite("eigenvalue"));
        }
        return Ok(EigenPair {
            lambda,
            kkt_residual: res,
            kkt_scale: scale,
            constraint_residuals: [(b_val - one).abs(), cu.abs(), cv.abs()],
            iterations,
            restarts,
            converged: res <= params.tol_kkt * scale,
            u,
            v,
        });
    }
}

/// Eigenvalue of the state's metric; convenience wrapper used along flows.
pub fn lambda_of_t<T: Real>(
    state: &CoupledState<T>,
    params: &EigenParams<T>,
    warm_start: Option<(&ScalarField<T>, &ScalarField<T>)>,
) -> Result<T> {
    Ok(first_eigenpair(&state.g, params, warm_start)?.lambda)
}
