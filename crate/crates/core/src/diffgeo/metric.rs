use super::field::{ScalarField, SymTensorField};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Pointwise symmetric positive-definite metric with cached volume density
/// and inverse components. Immutable once constructed; every constructor
/// re-validates positive definiteness.
#[derive(Clone, Debug)]
pub struct MetricField<T> {
    tensor: SymTensorField<T>,
    sqrt_det: Vec<T>,
    inv_xx: Vec<T>,
    inv_xy: Vec<T>,
    inv_yy: Vec<T>,
}

impl<T: Real> MetricField<T> {
    pub fn new(tensor: SymTensorField<T>) -> Result<Self> {
        let grid = tensor.grid;
        if !tensor.is_finite() {
            return Err(Error::NonFinite("metric components"));
        }
        let n = grid.nodes();
        let mut sqrt_det = vec![T::zero(); n];
        let mut inv_xx = vec![T::zero(); n];
        let mut inv_xy = vec![T::zero(); n];
        let mut inv_yy = vec![T::zero(); n];
        for k in 0..n {
            let xx = tensor.xx[k];
            if xx <= T::zero() {
                return Err(Error::DegenerateMetric(format!(
                    "g11 = {} <= 0 at node {k}",
                    xx.to_f64_lossy()
                )));
            }
            if grid.dim() == 1 {
                sqrt_det[k] = xx.sqrt();
                inv_xx[k] = T::one() / xx;
            } else {
                let det = xx * tensor.yy[k] - tensor.xy[k] * tensor.xy[k];
                if det <= T::zero() {
                    return Err(Error::DegenerateMetric(format!(
                        "det g = {} <= 0 at node {k}",
                        det.to_f64_lossy()
                    )));
                }
                sqrt_det[k] = det.sqrt();
                inv_xx[k] = tensor.yy[k] / det;
                inv_xy[k] = -tensor.xy[k] / det;
                inv_yy[k] = xx / det;
            }
        }
        Ok(MetricField { tensor, sqrt_det, inv_xx, inv_xy, inv_yy })
    }

    /// Flat (identity) metric.
    pub fn flat(grid: Grid<T>) -> Self {
        Self::new(SymTensorField::isotropic(grid, T::one())).expect("flat metric is SPD")
    }

    /// Conformal metric g = exp(2 u0) * delta.
    pub fn conformal(u0: &ScalarField<T>) -> Result<Self> {
        let grid = *u0.grid();
        let mut t = SymTensorField::zeros(grid);
        for (k, &u) in u0.values().iter().enumerate() {
            let e = (u + u).exp();
            t.xx[k] = e;
            if grid.dim() == 2 {
                t.yy[k] = e;
            }
        }
        Self::new(t)
    }

    /// Homothety c * g for constant c > 0.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if c <= T::zero() {
            return Err(Error::InvalidParam("homothety factor must be positive".into()));
        }
        let mut t = self.tensor.clone();
        t.scale(c);
        Self::new(t)
    }

    /// Metric after adding `dt * rate` to the components (used by the flow
    /// stepper, which revalidates SPD through the constructor).
    pub fn advanced(&self, dt: T, rate: &SymTensorField<T>) -> Result<Self> {
        let mut t = self.tensor.clone();
        t.axpy(dt, rate);
        Self::new(t)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.tensor.grid
    }

    #[inline]
    pub fn tensor(&self) -> &SymTensorField<T> {
        &self.tensor
    }

    #[inline]
    pub fn sqrt_det(&self) -> &[T] {
        &self.sqrt_det
    }

    #[inline]
    pub fn inv_xx(&self) -> &[T] {
        &self.inv_xx
    }

    #[inline]
    pub fn inv_xy(&self) -> &[T] {
        &self.inv_xy
    }

    #[inline]
    pub fn inv_yy(&self) -> &[T] {
        &self.inv_yy
    }

    pub fn min_det(&self) -> T {
        self.sqrt_det.iter().fold(T::infinity(), |a, &v| a.min(v * v))
    }

    /// Inverse-metric quadratic form on covariant components at node k.
    #[inline]
    pub fn inv_quad(&self, k: usize, wx: T, wy: T) -> T {
        self.inv_xx[k] * wx * wx
            + (self.inv_xy[k] + self.inv_xy[k]) * wx * wy
            + self.inv_yy[k] * wy * wy
    }

    /// Trace with respect to g of a covariant symmetric tensor at node k.
    #[inline]
    pub fn trace(&self, t: &SymTensorField<T>, k: usize) -> T {
        self.inv_xx[k] * t.xx[k]
            + (self.inv_xy[k] + self.inv_xy[k]) * t.xy[k]
            + self.inv_yy[k] * t.yy[k]
    }

    /// Largest pointwise eigenvalue bound of the inverse metric; sets the
    /// diffusion scale of the parabolic stability heuristic.
    pub fn max_inv_norm(&self) -> T {
        let mut m = T::zero();
        for k in 0..self.tensor.grid.nodes() {
            let bound = self.inv_xx[k].abs().max(self.inv_yy[k].abs()) + self.inv_xy[k].abs();
            m = m.max(bound);
        }
        m
    }

    /// Smallest generalized eigenvalue of a symmetric tensor with respect to
    /// g at node k: the least mu with det(t - mu g) = 0.
    pub fn min_gen_eig(&self, t: &SymTensorField<T>, k: usize) -> T {
        if self.tensor.grid.dim() == 1 {
            return t.xx[k] / self.tensor.xx[k];
        }
        // det(t - mu g) = a mu^2 + b mu + c with a = det g > 0
        let (gxx, gxy, gyy) = (self.tensor.xx[k], self.tensor.xy[k], self.tensor.yy[k]);
        let a = gxx * gyy - gxy * gxy;
        let b = (t.xy[k] + t.xy[k]) * gxy - t.xx[k] * gyy - t.yy[k] * gxx;
        let c = t.xx[k] * t.yy[k] - t.xy[k] * t.xy[k];
        let disc = (b * b - real::<T>(4.0) * a * c).max(T::zero());
        (-b - disc.sqrt()) / (a + a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_indefinite_metric() {
        let grid = Grid::torus(8, 1.0, 1.0).unwrap();
        let mut t = SymTensorField::isotropic(grid, 1.0);
        t.xy[3] = 2.0; // det = 1 - 4 < 0
        assert!(matches!(MetricField::new(t), Err(Error::DegenerateMetric(_))));
        let mut t = SymTensorField::isotropic(grid, 1.0);
        t.xx[0] = -1.0;
        assert!(MetricField::new(t).is_err());
    }

    #[test]
    fn caches_match_components() {
        let grid = Grid::torus(8, 1.0, 1.0).unwrap();
        let mut t = SymTensorField::isotropic(grid, 2.0);
        t.xy[5] = 0.5;
        let g = MetricField::new(t).unwrap();
        let det: f64 = 2.0 * 2.0 - 0.25;
        assert_relative_eq!(g.sqrt_det()[5], det.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g.inv_xx()[5], 2.0 / det, max_relative = 1e-14);
        assert_relative_eq!(g.inv_xy()[5], -0.5 / det, max_relative = 1e-14);
    }

    #[test]
    fn circle_metric_uses_g11_as_density() {
        let grid = Grid::circle(8, 1.0).unwrap();
        let g = MetricField::new(SymTensorField::isotropic(grid, 4.0)).unwrap();
        assert_relative_eq!(g.sqrt_det()[0], 2.0);
        assert_relative_eq!(g.inv_xx()[0], 0.25);
    }

    #[test]
    fn generalized_eigenvalue_2x2() {
        let grid = Grid::torus(8, 1.0, 1.0).unwrap();
        let g = MetricField::flat(grid);
        let mut t = SymTensorField::zeros(grid);
        // diag(-1, 0.25) against identity: min eigenvalue -1
        for k in 0..grid.nodes() {
            t.xx[k] = -1.0;
            t.yy[k] = 0.25;
        }
        assert_relative_eq!(g.min_gen_eig(&t, 0), -1.0, max_relative = 1e-14);
    }
}
