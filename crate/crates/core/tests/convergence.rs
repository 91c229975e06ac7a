//! Grid-refinement behavior: the centered stencils are second order, so
//! errors should drop by about 4x per doubling (>= 3.5 asserted).

use pqflow_core::diffgeo::{p_laplacian, ricci_and_scalar, Grid, MetricField, ScalarField};
use pqflow_core::pqeigen::{first_eigenpair, EigenParams};
use std::f64::consts::TAU;

fn p_laplacian_err(n: usize) -> f64 {
    // Delta_4 sin x = -3 cos^2 x sin x on the flat circle
    let grid = Grid::circle(n, TAU).unwrap();
    let g = MetricField::flat(grid);
    let f = ScalarField::from_fn(grid, |x, _| x.sin());
    let lap = p_laplacian(&f, &g, 4.0, 0.0).unwrap();
    let exact = ScalarField::from_fn(grid, |x, _| -3.0 * x.cos().powi(2) * x.sin());
    lap.zip(&exact, |a, b| a - b).max_abs()
}

#[test]
fn p_laplacian_second_order() {
    let ratio = p_laplacian_err(64) / p_laplacian_err(128);
    assert!(ratio >= 3.5, "ratio {ratio}");
}

fn curvature_err(n: usize) -> f64 {
    let grid = Grid::torus(n, TAU, TAU).unwrap();
    let u0 = ScalarField::from_fn(grid, |x, y| 0.2 * x.sin() + 0.1 * y.cos());
    let g = MetricField::conformal(&u0).unwrap();
    let (_, r) = ricci_and_scalar(&g).unwrap();
    // R = -2 e^{-2 u0} Delta u0 for conformally flat surfaces
    let exact = ScalarField::from_fn(grid, |x, y| {
        let u = 0.2 * x.sin() + 0.1 * y.cos();
        let lap = -0.2 * x.sin() - 0.1 * y.cos();
        -2.0 * (-2.0 * u).exp() * lap
    });
    r.zip(&exact, |a, b| a - b).max_abs()
}

#[test]
fn curvature_second_order() {
    let ratio = curvature_err(32) / curvature_err(64);
    assert!(ratio >= 3.5, "ratio {ratio}");
}

fn eigen_err(n: usize) -> f64 {
    let grid = Grid::torus(n, TAU, TAU).unwrap();
    let g = MetricField::flat(grid);
    let params = EigenParams::new(2.0, 2.0, 0.0).unwrap();
    (first_eigenpair(&g, &params, None).unwrap().lambda - 1.0).abs()
}

#[test]
fn eigenvalue_second_order_to_continuum() {
    let ratio = eigen_err(24) / eigen_err(48);
    assert!(ratio >= 3.5, "ratio {ratio}");
}
