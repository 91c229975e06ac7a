//! Time integration of the Ricci-harmonic flow, its normalized variant and
//! the Ricci flow, plus the closed-form homothetic Einstein family.

use crate::diffgeo::{
    coupling_tensors, integrate, laplace_beltrami, volume, MetricField, ScalarField,
    SymTensorField,
};
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// One snapshot of the coupled flow: metric, map and time.
#[derive(Clone, Debug)]
pub struct CoupledState<T> {
    pub g: MetricField<T>,
    pub phi: ScalarField<T>,
    pub t: T,
}

impl<T: Real> CoupledState<T> {
    pub fn new(g: MetricField<T>, phi: ScalarField<T>, t: T) -> Result<Self> {
        if phi.grid() != g.grid() {
            return Err(Error::GridMismatch("coupled state: phi and metric"));
        }
        if !phi.is_finite() {
            return Err(Error::NonFinite("phi"));
        }
        if t < T::zero() {
            return Err(Error::InvalidParam("state time must be nonnegative".into()));
        }
        Ok(CoupledState { g, phi, t })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stepper {
    Euler,
    Rk4,
}

/// Flow configuration. `kappa` is the harmonic-map coupling constant; the
/// normalized variant adds (2/m) r g to the metric rate.
#[derive(Clone, Copy, Debug)]
pub struct FlowConfig<T> {
    pub kappa: T,
    pub normalized: bool,
    pub t_end: T,
    pub dt_safety: T,
    pub stepper: Stepper,
    /// Number of record intervals across [0, t_end]; a trace has records+1 rows.
    pub records: usize,
}

impl<T: Real> FlowConfig<T> {
    pub fn new(kappa: T, normalized: bool, t_end: T) -> Result<Self> {
        let cfg = FlowConfig {
            kappa,
            normalized,
            t_end,
            dt_safety: real::<T>(0.25),
            stepper: Stepper::Rk4,
            records: 20,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa < T::zero() {
            return Err(Error::InvalidParam("flow coupling kappa must be nonnegative".into()));
        }
        if self.t_end <= T::zero() {
            return Err(Error::InvalidParam("t_end must be positive".into()));
        }
        if self.dt_safety <= T::zero() || self.dt_safety > T::one() {
            return Err(Error::InvalidParam("dt_safety must lie in (0, 1]".into()));
        }
        if self.records == 0 {
            return Err(Error::InvalidParam("records must be at least 1".into()));
        }
        Ok(())
    }
}

/// Rates of change of the coupled state.
#[derive(Clone, Debug)]
pub struct Rates<T> {
    pub metric: SymTensorField<T>,
    pub phi: ScalarField<T>,
}

/// Unnormalized flow right-hand side:
/// dg/dt = -2 Ric + 2 kappa dphi (x) dphi = -2 S_tensor, dphi/dt = Delta_g phi.
pub fn rhs_unnormalized<T: Real>(state: &CoupledState<T>, kappa: T) -> Result<Rates<T>> {
    let (mut s_tensor, _) = coupling_tensors(&state.g, &state.phi, kappa)?;
    s_tensor.scale(real::<T>(-2.0));
    let phi_rate = laplace_beltrami(&state.phi, &state.g)?;
    Ok(Rates { metric: s_tensor, phi: phi_rate })
}

/// Volume average of S = R - kappa |nabla phi|^2.
pub fn average_r<T: Real>(state: &CoupledState<T>, kappa: T) -> Result<T> {
    let (_, s) = coupling_tensors(&state.g, &state.phi, kappa)?;
    Ok(integrate(&s, &state.g)? / volume(&state.g))
}

/// Normalized flow right-hand side: unnormalized rate plus (2/m) r g.
pub fn rhs_normalized<T: Real>(state: &CoupledState<T>, kappa: T) -> Result<Rates<T>> {
    let mut rates = rhs_unnormalized(state, kappa)?;
    let r = average_r(state, kappa)?;
    let m = real::<T>(state.g.grid().dim() as f64);
    let c = (r + r) / m;
    rates.metric.axpy(c, state.g.tensor());
    Ok(rates)
}

/// Spatial minimum of S.
pub fn s_min<T: Real>(state: &CoupledState<T>, kappa: T) -> Result<T> {
    let (_, s) = coupling_tensors(&state.g, &state.phi, kappa)?;
    Ok(s.min())
}

fn eval_rates<T: Real>(state: &CoupledState<T>, config: &FlowConfig<T>) -> Result<Rates<T>> {
    if config.normalized {
        rhs_normalized(state, config.kappa)
    } else {
        rhs_unnormalized(state, config.kappa)
    }
}

fn advanced<T: Real>(
    state: &CoupledState<T>,
    dt: T,
    rates: &Rates<T>,
    t_new: T,
) -> Result<CoupledState<T>> {
    let g = state.g.advanced(dt, &rates.metric)?;
    let mut phi = state.phi.clone();
    phi.axpy(dt, &rates.phi);
    CoupledState::new(g, phi, t_new)
}

fn try_step<T: Real>(
    state: &CoupledState<T>,
    config: &FlowConfig<T>,
    dt: T,
) -> Result<CoupledState<T>> {
    let t_new = state.t + dt;
    match config.stepper {
        Stepper::Euler => {
            let k1 = eval_rates(state, config)?;
            advanced(state, dt, &k1, t_new)
        }
        Stepper::Rk4 => {
            let half = dt * real::<T>(0.5);
            let k1 = eval_rates(state, config)?;
            let s2 = advanced(state, half, &k1, state.t + half)?;
            let k2 = eval_rates(&s2, config)?;
            let s3 = advanced(state, half, &k2, state.t + half)?;
            let k3 = eval_rates(&s3, config)?;
            let s4 = advanced(state, dt, &k3, t_new)?;
            let k4 = eval_rates(&s4, config)?;
            let sixth = dt / real::<T>(6.0);
            let third = dt / real::<T>(3.0);
            let g = {
                let mut t = state.g.tensor().clone();
                t.axpy(sixth, &k1.metric);
                t.axpy(third, &k2.metric);
                t.axpy(third, &k3.metric);
                t.axpy(sixth, &k4.metric);
                MetricField::new(t)?
            };
            let mut phi = state.phi.clone();
            phi.axpy(sixth, &k1.phi);
            phi.axpy(third, &k2.phi);
            phi.axpy(third, &k3.phi);
            phi.axpy(sixth, &k4.phi);
            CoupledState::new(g, phi, t_new)
        }
    }
}

/// Parabolic stability heuristic: dt = dt_safety * h_min^2 / (4 * diffusion
/// scale), the diffusion scale being the largest inverse-metric norm.
pub fn suggest_dt<T: Real>(state: &CoupledState<T>, config: &FlowConfig<T>) -> T {
    let grid = state.g.grid();
    let h_min = if grid.dim() == 2 { grid.h(0).min(grid.h(1)) } else { grid.h(0) };
    let scale = state.g.max_inv_norm().max(T::epsilon());
    config.dt_safety * h_min * h_min / (real::<T>(4.0) * scale)
}

/// One explicit step of at most `dt_cap`; on SPD violation or non-finite
/// values the step is retried with halved dt, up to 10 halvings.
pub fn step_by<T: Real>(
    state: &CoupledState<T>,
    config: &FlowConfig<T>,
    dt_cap: T,
) -> Result<CoupledState<T>> {
    let mut dt = suggest_dt(state, config).min(dt_cap);
    for _ in 0..=10 {
        match try_step(state, config, dt) {
            Ok(next) => return Ok(next),
            Err(Error::DegenerateMetric(_)) | Err(Error::NonFinite(_)) => {
                dt = dt * real::<T>(0.5);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::StepFailure {
        t: state.t.to_f64_lossy(),
        min_det: state.g.min_det().to_f64_lossy(),
        detail: "dt underflow after 10 halvings".into(),
    })
}

/// One explicit step at the heuristic dt.
pub fn step<T: Real>(state: &CoupledState<T>, config: &FlowConfig<T>) -> Result<CoupledState<T>> {
    step_by(state, config, T::infinity())
}

/// Maximum-principle comparison value y(t) = S_min(0) / (1 - (2/m) S_min(0) t).
pub fn comparison_bound_y<T: Real>(t: T, s_min0: T, m: usize) -> Result<T> {
    let mf = real::<T>(m as f64);
    let denom = T::one() - (s_min0 + s_min0) / mf * t;
    if s_min0 > T::zero() && denom <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "comparison bound blown up: t = {} beyond m / (2 S_min(0))",
            t.to_f64_lossy()
        )));
    }
    Ok(s_min0 / denom)
}

/// Parameters of the homothetic Einstein family g(t) = c(t) g0 with
/// Ric(g0) = a g0; the map stays the (harmonic) identity.
#[derive(Clone, Copy, Debug)]
pub struct EinsteinParams<T> {
    pub a: T,
    pub kappa: T,
    pub m: usize,
    pub p: T,
    pub t_max: T,
}

impl<T: Real> EinsteinParams<T> {
    /// Horizon T'' = min(T, 1 / (2 (a - kappa))) when kappa < a, else T.
    pub fn horizon(&self) -> T {
        if self.kappa < self.a {
            self.t_max.min(T::one() / ((self.a - self.kappa) * real::<T>(2.0)))
        } else {
            self.t_max
        }
    }
}

/// Homothety factor c(t) = (-2a + 2 kappa) t + 1.
pub fn einstein_c<T: Real>(t: T, params: &EinsteinParams<T>) -> Result<T> {
    if t < T::zero() {
        return Err(Error::InvalidParam("einstein_c: t must be nonnegative".into()));
    }
    let c = (params.kappa - params.a) * real::<T>(2.0) * t + T::one();
    if c <= T::zero() {
        return Err(Error::InvalidParam(format!(
            "einstein family degenerates: c({}) <= 0",
            t.to_f64_lossy()
        )));
    }
    Ok(c)
}

/// S along the Einstein family: (a - kappa) m / c(t).
pub fn einstein_s<T: Real>(t: T, params: &EinsteinParams<T>) -> Result<T> {
    let c = einstein_c(t, params)?;
    Ok((params.a - params.kappa) * real::<T>(params.m as f64) / c)
}

/// Exact eigenvalue along the homothety for p = q:
/// lambda(t) = lambda0 * c(t)^(-p/2).
pub fn einstein_lambda_scaling<T: Real>(
    lambda0: T,
    t: T,
    params: &EinsteinParams<T>,
) -> Result<T> {
    let c = einstein_c(t, params)?;
    Ok(lambda0 * c.powf(-params.p * real::<T>(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::{ricci_and_scalar, Grid};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn torus(n: usize) -> Grid<f64> {
        Grid::torus(n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    fn flat_state(n: usize) -> CoupledState<f64> {
        let grid = torus(n);
        CoupledState::new(MetricField::flat(grid), ScalarField::constant(grid, 1.0), 0.0).unwrap()
    }

    #[test]
    fn flat_constant_phi_is_fixed_point() {
        let state = flat_state(16);
        for kappa in [0.0, 1.0] {
            let r = rhs_unnormalized(&state, kappa).unwrap();
            assert!(r.metric.max_abs() < 1e-12);
            assert!(r.phi.max_abs() < 1e-12);
            let rn = rhs_normalized(&state, kappa).unwrap();
            assert!(rn.metric.max_abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_zero_is_ricci_flow() {
        let grid = torus(32);
        let u0 = ScalarField::from_fn(grid, |x, _| 0.2 * x.cos());
        let g = MetricField::conformal(&u0).unwrap();
        let phi = ScalarField::from_fn(grid, |x, _| x.sin());
        let state = CoupledState::new(g, phi, 0.0).unwrap();
        let rates = rhs_unnormalized(&state, 0.0).unwrap();
        let (ric, _) = ricci_and_scalar(&state.g).unwrap();
        for k in 0..grid.nodes() {
            assert_relative_eq!(rates.metric.xx[k], -2.0 * ric.xx[k], epsilon = 1e-12);
            assert_relative_eq!(rates.metric.yy[k], -2.0 * ric.yy[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_sin_phi_rates() {
        let grid = torus(256);
        let g = MetricField::flat(grid);
        let phi = ScalarField::from_fn(grid, |x, _| x.sin());
        let state = CoupledState::new(g, phi, 0.0).unwrap();
        let rates = rhs_unnormalized(&state, 1.0).unwrap();
        let h = grid.h(0);
        for i in 0..grid.nx() {
            let (x, _) = grid.coord(i, 0);
            let k = grid.idx(i, 0);
            assert!((rates.metric.xx[k] - 2.0 * x.cos().powi(2)).abs() < 4.0 * h * h);
            assert!((rates.phi.values()[k] + x.sin()).abs() < 4.0 * h * h);
        }
    }

    #[test]
    fn average_r_values() {
        let state = flat_state(16);
        assert!(average_r(&state, 1.0).unwrap().abs() < 1e-13);
        let grid = torus(128);
        let g = MetricField::flat(grid);
        let phi = ScalarField::from_fn(grid, |x, _| x.sin());
        let st = CoupledState::new(g, phi, 0.0).unwrap();
        let r = average_r(&st, 1.0).unwrap();
        assert_relative_eq!(r, -0.5, max_relative = 1e-3);
        // s_min of -cos^2 is -1, and min <= mean
        let sm = s_min(&st, 1.0).unwrap();
        assert_relative_eq!(sm, -1.0, max_relative = 1e-3);
        assert!(sm <= r);
    }

    #[test]
    fn normalized_rate_preserves_volume_rate() {
        // trace of the normalized metric rate integrates to zero
        let grid = torus(32);
        let u0 = ScalarField::from_fn(grid, |x, y| 0.2 * x.cos() + 0.1 * y.sin());
        let g = MetricField::conformal(&u0).unwrap();
        let phi = ScalarField::from_fn(grid, |x, _| 0.3 * x.sin());
        let state = CoupledState::new(g, phi, 0.0).unwrap();
        let rates = rhs_normalized(&state, 0.7).unwrap();
        // dVol/dt = 1/2 int tr_g(dg/dt) dmu
        let mut tr = ScalarField::zeros(grid);
        for k in 0..grid.nodes() {
            tr.values_mut()[k] = state.g.trace(&rates.metric, k);
        }
        let dvol = 0.5 * integrate(&tr, &state.g).unwrap();
        assert!(dvol.abs() < 1e-10 * volume(&state.g));
    }

    #[test]
    fn fixed_point_step_advances_time_only() {
        let state = flat_state(16);
        let config = FlowConfig::new(1.0, false, 1.0).unwrap();
        let next = step(&state, &config).unwrap();
        assert!(next.t > 0.0);
        assert!(next.phi.zip(&state.phi, |a, b| a - b).max_abs() < 1e-14);
        assert!((volume(&next.g) - volume(&state.g)).abs() < 1e-12);
    }

    #[test]
    fn conformal_ricci_flow_flattens() {
        let grid = torus(32);
        let u0 = ScalarField::from_fn(grid, |x, _| 0.2 * x.cos());
        let g = MetricField::conformal(&u0).unwrap();
        let mut state = CoupledState::new(g, ScalarField::zeros(grid), 0.0).unwrap();
        let config = FlowConfig::new(0.0, false, 1.0).unwrap();
        let (_, r0) = ricci_and_scalar(&state.g).unwrap();
        let mut prev = r0.max_abs();
        for _ in 0..5 {
            for _ in 0..20 {
                state = step(&state, &config).unwrap();
            }
            let (_, r) = ricci_and_scalar(&state.g).unwrap();
            let cur = r.max_abs();
            assert!(cur < prev, "curvature should decay: {cur} !< {prev}");
            prev = cur;
        }
    }

    #[test]
    fn euler_and_rk4_agree_to_first_order() {
        let grid = torus(32);
        let u0 = ScalarField::from_fn(grid, |x, y| 0.1 * x.cos() + 0.05 * y.sin());
        let g = MetricField::conformal(&u0).unwrap();
        let phi = ScalarField::from_fn(grid, |x, _| 0.2 * x.sin());
        let state = CoupledState::new(g, phi, 0.0).unwrap();
        let mut ce = FlowConfig::new(0.5, false, 1.0).unwrap();
        ce.stepper = Stepper::Euler;
        let mut cr = ce;
        cr.stepper = Stepper::Rk4;
        let dt = 1e-4;
        let se = step_by(&state, &ce, dt).unwrap();
        let sr = step_by(&state, &cr, dt).unwrap();
        let diff = se.phi.zip(&sr.phi, |a, b| a - b).max_abs();
        assert!(diff < 10.0 * dt * dt, "stepper disagreement {diff}");
    }

    #[test]
    fn comparison_bound_values() {
        assert_eq!(comparison_bound_y(0.7, 0.0, 2).unwrap(), 0.0);
        assert_relative_eq!(comparison_bound_y(0.25, 2.0, 2).unwrap(), 4.0);
        // negative initial minimum rises toward zero
        let y1 = comparison_bound_y(0.1, -1.0, 2).unwrap();
        let y2 = comparison_bound_y(0.5, -1.0, 2).unwrap();
        assert!(-1.0 < y1 && y1 < y2 && y2 < 0.0);
        assert!(comparison_bound_y(1.0, 2.0, 2).is_err());
    }

    #[test]
    fn einstein_closed_forms() {
        let params = EinsteinParams { a: 1.0, kappa: 0.0, m: 2, p: 2.0, t_max: 10.0 };
        assert_relative_eq!(einstein_c(0.25, &params).unwrap(), 0.5);
        assert_relative_eq!(einstein_s(0.0, &params).unwrap(), 2.0);
        assert_relative_eq!(einstein_lambda_scaling(3.0, 0.25, &params).unwrap(), 6.0);
        assert_relative_eq!(einstein_lambda_scaling(3.0, 0.0, &params).unwrap(), 3.0);
        assert_relative_eq!(params.horizon(), 0.5);
        assert!(einstein_c(0.6, &params).is_err());
        let steady = EinsteinParams { a: 1.0, kappa: 1.0, m: 2, p: 2.0, t_max: 10.0 };
        assert_relative_eq!(einstein_c(5.0, &steady).unwrap(), 1.0);
    }
}
