//! Discrete Riemannian operators on periodic grids.
//!
//! Divergence-form operators (Laplace-Beltrami, p-Laplacian) are defined as
//! the exact gradient of a face-flux Dirichlet energy: the squared gradient
//! entering the energy averages the two one-sided differences per axis, and
//! face coefficients are arithmetic means of the adjacent nodal values of
//! sqrt(det g) * g^{ij}. Summation by parts then telescopes exactly, so the
//! discrete divergence theorem and the eigensolver's KKT identities hold to
//! round-off.

use super::field::{ScalarField, SymTensorField, VectorField};
use super::grid::Grid;
use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

pub(crate) fn same_grid<T: Real>(a: &Grid<T>, b: &Grid<T>, what: &'static str) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(what));
    }
    Ok(())
}

/// Metric gradient (nabla f)^i = g^{ij} d_j f, centered differences.
pub fn gradient<T: Real>(f: &ScalarField<T>, g: &MetricField<T>) -> Result<VectorField<T>> {
    same_grid(f.grid(), g.grid(), "gradient: field and metric")?;
    let grid = *f.grid();
    let mut out = VectorField::zeros(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let dx = f.centered(i, j, 0);
            let dy = f.centered(i, j, 1);
            out.x[k] = g.inv_xx()[k] * dx + g.inv_xy()[k] * dy;
            out.y[k] = g.inv_xy()[k] * dx + g.inv_yy()[k] * dy;
        }
    }
    Ok(out)
}

/// |nabla f|^2_g = g^{ij} d_i f d_j f with centered partials. This is the
/// pointwise (tensor-calculus) squared gradient used by curvature coupling;
/// energies use the face-averaged variant `face_grad_sq`.
pub fn grad_norm_sq<T: Real>(f: &ScalarField<T>, g: &MetricField<T>) -> Result<ScalarField<T>> {
    same_grid(f.grid(), g.grid(), "grad_norm_sq: field and metric")?;
    let grid = *f.grid();
    let mut out = ScalarField::zeros(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let dx = f.centered(i, j, 0);
            let dy = f.centered(i, j, 1);
            out.values_mut()[k] = g.inv_quad(k, dx, dy);
        }
    }
    Ok(out)
}

/// Face-averaged squared gradient: per axis the mean of the two one-sided
/// difference squares, cross term via centered differences. Second-order
/// accurate and exactly compatible with `p_laplacian`.
pub fn face_grad_sq<T: Real>(f: &ScalarField<T>, g: &MetricField<T>) -> Result<ScalarField<T>> {
    same_grid(f.grid(), g.grid(), "face_grad_sq: field and metric")?;
    let grid = *f.grid();
    let half = real::<T>(0.5);
    let mut out = ScalarField::zeros(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let dxp = f.forward(i, j, 0);
            let dxm = f.forward(grid.wrap(i, -1, 0), j, 0);
            let dyp = f.forward(i, j, 1);
            let dym = f.forward(i, grid.wrap(j, -1, 1), 1);
            let qxx = half * (dxp * dxp + dxm * dxm);
            let qyy = half * (dyp * dyp + dym * dym);
            let cx = half * (dxp + dxm);
            let cy = half * (dyp + dym);
            out.values_mut()[k] = g.inv_xx()[k] * qxx
                + (g.inv_xy()[k] + g.inv_xy()[k]) * cx * cy
                + g.inv_yy()[k] * qyy;
        }
    }
    Ok(out)
}

/// Regularized p-Dirichlet energy integral over the face-averaged squared
/// gradient: sum of sqrt(det g) (Q + delta^2)^{p/2} over cells. With delta = 0
/// this is the discrete value of the integral of |nabla f|^p dmu.
pub fn p_dirichlet_energy<T: Real>(
    f: &ScalarField<T>,
    g: &MetricField<T>,
    p: T,
    delta: T,
) -> Result<T> {
    let q = face_grad_sq(f, g)?;
    let cell = f.grid().cell();
    let half_p = p * real::<T>(0.5);
    let d2 = delta * delta;
    let mut acc = T::zero();
    for (k, &qk) in q.values().iter().enumerate() {
        acc += g.sqrt_det()[k] * (qk + d2).powf(half_p);
    }
    Ok(acc * cell)
}

/// Exact Euclidean gradient of `p_dirichlet_energy` with respect to the
/// nodal values of f, scaled by 1/p (so that for p = 2, delta = 0 it is
/// minus the weak-form Laplace-Beltrami matrix applied to f).
fn p_energy_gradient<T: Real>(
    f: &ScalarField<T>,
    g: &MetricField<T>,
    p: T,
    delta: T,
) -> Result<Vec<T>> {
    same_grid(f.grid(), g.grid(), "p_laplacian: field and metric")?;
    if p <= T::one() {
        return Err(Error::InvalidParam(format!("p = {} must exceed 1", p.to_f64_lossy())));
    }
    if delta < T::zero() {
        return Err(Error::InvalidParam("regularizer delta must be nonnegative".into()));
    }
    let grid = *f.grid();
    let half = real::<T>(0.5);
    let cell = grid.cell();
    let hx = grid.h(0);
    let hy = grid.h(1);
    let d2 = delta * delta;
    let exp = (p - real::<T>(2.0)) * half;
    let mut grad = vec![T::zero(); grid.nodes()];
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let iw = grid.wrap(i, -1, 0);
            let ie = grid.wrap(i, 1, 0);
            let js = grid.wrap(j, -1, 1);
            let jn = grid.wrap(j, 1, 1);
            let dxp = f.forward(i, j, 0);
            let dxm = f.forward(iw, j, 0);
            let dyp = f.forward(i, j, 1);
            let dym = f.forward(i, js, 1);
            let qxx = half * (dxp * dxp + dxm * dxm);
            let qyy = half * (dyp * dyp + dym * dym);
            let cx = half * (dxp + dxm);
            let cy = half * (dyp + dym);
            let a = g.inv_xx()[k];
            let b = g.inv_xy()[k];
            let c = g.inv_yy()[k];
            let base = a * qxx + (b + b) * cx * cy + c * qyy + d2;
            let w = if base > T::zero() {
                g.sqrt_det()[k] * base.powf(exp) * cell
            } else {
                T::zero() // degenerate point of a sub-quadratic energy
            };
            if w == T::zero() {
                continue;
            }
            // d/du of a*(dxp^2+dxm^2)/2
            let fx_p = w * a * dxp * half / hx;
            let fx_m = w * a * dxm * half / hx;
            grad[grid.idx(ie, j)] += fx_p;
            grad[k] -= fx_p;
            grad[k] += fx_m;
            grad[grid.idx(iw, j)] -= fx_m;
            // d/du of c*(dyp^2+dym^2)/2
            let fy_p = w * c * dyp * half / hy;
            let fy_m = w * c * dym * half / hy;
            grad[grid.idx(i, jn)] += fy_p;
            grad[k] -= fy_p;
            grad[k] += fy_m;
            grad[grid.idx(i, js)] -= fy_m;
            // d/du of 2*b*cx*cy
            let gx = w * b * cy / hx;
            let gy = w * b * cx / hy;
            grad[grid.idx(ie, j)] += gx;
            grad[grid.idx(iw, j)] -= gx;
            grad[grid.idx(i, jn)] += gy;
            grad[grid.idx(i, js)] -= gy;
        }
    }
    Ok(grad)
}

/// p-Laplacian: staggered-flux divergence of (|nabla f|^2 + delta^2)^{(p-2)/2}
/// nabla f, defined so that the L^2(dmu) pairing with any test field equals
/// minus the energy pairing exactly.
pub fn p_laplacian<T: Real>(
    f: &ScalarField<T>,
    g: &MetricField<T>,
    p: T,
    delta: T,
) -> Result<ScalarField<T>> {
    let grad = p_energy_gradient(f, g, p, delta)?;
    let grid = *f.grid();
    let cell = grid.cell();
    let mut out = ScalarField::zeros(grid);
    for (k, gv) in grad.into_iter().enumerate() {
        out.values_mut()[k] = -gv / (g.sqrt_det()[k] * cell);
    }
    Ok(out)
}

/// Laplace-Beltrami operator: divergence of the metric gradient.
pub fn laplace_beltrami<T: Real>(f: &ScalarField<T>, g: &MetricField<T>) -> Result<ScalarField<T>> {
    p_laplacian(f, g, real::<T>(2.0), T::zero())
}

/// Tension field of a real-valued map: the Laplace-Beltrami of phi.
pub fn tension_field<T: Real>(phi: &ScalarField<T>, g: &MetricField<T>) -> Result<ScalarField<T>> {
    laplace_beltrami(phi, g)
}

fn det3<T: Real>(m: [[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Ricci tensor and scalar curvature. In 2D the Gaussian curvature comes
/// from the Brioschi formula on the raw components and Ric = K g; in 1D both
/// vanish identically.
pub fn ricci_and_scalar<T: Real>(
    g: &MetricField<T>,
) -> Result<(SymTensorField<T>, ScalarField<T>)> {
    let grid = *g.grid();
    if grid.dim() == 1 {
        return Ok((SymTensorField::zeros(grid), ScalarField::zeros(grid)));
    }
    let e = ScalarField::from_vec(grid, g.tensor().xx.clone())?;
    let f = ScalarField::from_vec(grid, g.tensor().xy.clone())?;
    let gg = ScalarField::from_vec(grid, g.tensor().yy.clone())?;
    let hx = grid.h(0);
    let hy = grid.h(1);
    let half = real::<T>(0.5);
    let mut ric = SymTensorField::zeros(grid);
    let mut scal = ScalarField::zeros(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let iw = grid.wrap(i, -1, 0);
            let ie = grid.wrap(i, 1, 0);
            let js = grid.wrap(j, -1, 1);
            let jn = grid.wrap(j, 1, 1);
            let e_u = e.centered(i, j, 0);
            let e_v = e.centered(i, j, 1);
            let f_u = f.centered(i, j, 0);
            let f_v = f.centered(i, j, 1);
            let g_u = gg.centered(i, j, 0);
            let g_v = gg.centered(i, j, 1);
            let e_vv = (e.at(i, jn) - (e.at(i, j) + e.at(i, j)) + e.at(i, js)) / (hy * hy);
            let g_uu = (gg.at(ie, j) - (gg.at(i, j) + gg.at(i, j)) + gg.at(iw, j)) / (hx * hx);
            let f_uv = (f.at(ie, jn) - f.at(ie, js) - f.at(iw, jn) + f.at(iw, js))
                / (real::<T>(4.0) * hx * hy);
            let ev = e.at(i, j);
            let fv = f.at(i, j);
            let gv = gg.at(i, j);
            let m1 = [
                [-half * e_vv + f_uv - half * g_uu, half * e_u, f_u - half * e_v],
                [f_v - half * g_u, ev, fv],
                [half * g_v, fv, gv],
            ];
            let m2 = [
                [T::zero(), half * e_v, half * g_u],
                [half * e_v, ev, fv],
                [half * g_u, fv, gv],
            ];
            let det_g = ev * gv - fv * fv;
            let kappa = (det3(m1) - det3(m2)) / (det_g * det_g);
            ric.xx[k] = kappa * ev;
            ric.xy[k] = kappa * fv;
            ric.yy[k] = kappa * gv;
            scal.values_mut()[k] = kappa + kappa;
        }
    }
    if !ric.is_finite() || !scal.is_finite() {
        return Err(Error::NonFinite("curvature"));
    }
    Ok((ric, scal))
}

/// Coupled curvature tensor and its trace: the Ricci tensor minus
/// kappa * dphi (x) dphi, and S = R - kappa |nabla phi|^2.
pub fn coupling_tensors<T: Real>(
    g: &MetricField<T>,
    phi: &ScalarField<T>,
    kappa: T,
) -> Result<(SymTensorField<T>, ScalarField<T>)> {
    same_grid(phi.grid(), g.grid(), "coupling_tensors: phi and metric")?;
    let grid = *g.grid();
    let (mut s_tensor, mut s_scalar) = ricci_and_scalar(g)?;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let k = grid.idx(i, j);
            let px = phi.centered(i, j, 0);
            let py = phi.centered(i, j, 1);
            s_tensor.xx[k] -= kappa * px * px;
            s_tensor.xy[k] -= kappa * px * py;
            s_tensor.yy[k] -= kappa * py * py;
            s_scalar.values_mut()[k] -= kappa * g.inv_quad(k, px, py);
        }
    }
    Ok((s_tensor, s_scalar))
}

/// Midpoint-rule integral of f against the volume form of g.
pub fn integrate<T: Real>(f: &ScalarField<T>, g: &MetricField<T>) -> Result<T> {
    same_grid(f.grid(), g.grid(), "integrate: field and metric")?;
    let mut acc = T::zero();
    for (k, &v) in f.values().iter().enumerate() {
        acc += v * g.sqrt_det()[k];
    }
    Ok(acc * f.grid().cell())
}

/// Riemannian volume of the grid torus.
pub fn volume<T: Real>(g: &MetricField<T>) -> T {
    let cell = g.grid().cell();
    let s: T = g.sqrt_det().iter().copied().sum();
    s * cell
}

/// L^2(dmu) norm.
pub fn l2_norm<T: Real>(f: &ScalarField<T>, g: &MetricField<T>) -> Result<T> {
    let sq = f.map(|v| v * v);
    Ok(integrate(&sq, g)?.max(T::zero()).sqrt())
}
