use super::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One real value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    data: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        ScalarField { grid, data: vec![T::zero(); grid.nodes()] }
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        ScalarField { grid, data: vec![c; grid.nodes()] }
    }

    /// Sample a coordinate function at the nodes.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(T, T) -> T) -> Self {
        let mut data = Vec::with_capacity(grid.nodes());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.coord(i, j);
                data.push(f(x, y));
            }
        }
        ScalarField { grid, data }
    }

    pub fn from_vec(grid: Grid<T>, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.nodes() {
            return Err(Error::GridMismatch("data length does not match grid"));
        }
        Ok(ScalarField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[self.grid.idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.data.iter().fold(T::infinity(), |a, &v| a.min(v))
    }

    /// Periodic centered difference along `axis` at node (i, j).
    #[inline]
    pub fn centered(&self, i: usize, j: usize, axis: usize) -> T {
        let g = &self.grid;
        let two_h = g.h(axis) + g.h(axis);
        let (p, m) = if axis == 0 {
            (g.idx(g.wrap(i, 1, 0), j), g.idx(g.wrap(i, -1, 0), j))
        } else {
            (g.idx(i, g.wrap(j, 1, 1)), g.idx(i, g.wrap(j, -1, 1)))
        };
        (self.data[p] - self.data[m]) / two_h
    }

    /// Forward one-sided difference along `axis` (the value on the face
    /// between (i, j) and its positive neighbor).
    #[inline]
    pub fn forward(&self, i: usize, j: usize, axis: usize) -> T {
        let g = &self.grid;
        let h = g.h(axis);
        let p = if axis == 0 { g.idx(g.wrap(i, 1, 0), j) } else { g.idx(i, g.wrap(j, 1, 1)) };
        (self.data[p] - self.data[g.idx(i, j)]) / h
    }

    /// Cyclic shift of the whole field by (di, dj) nodes; used by the
    /// isometry-invariance checks.
    pub fn shifted(&self, di: isize, dj: isize) -> Self {
        let g = self.grid;
        let mut out = Self::zeros(g);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let si = g.wrap(i, -di, 0);
                let sj = g.wrap(j, -dj, 1);
                out.data[g.idx(i, j)] = self.data[g.idx(si, sj)];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        ScalarField { grid: self.grid, data }
    }

    pub fn axpy(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, s: T) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }
}

/// Contravariant vector field (one component per axis).
#[derive(Clone, Debug)]
pub struct VectorField<T> {
    pub grid: Grid<T>,
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        VectorField { grid, x: vec![T::zero(); grid.nodes()], y: vec![T::zero(); grid.nodes()] }
    }

    pub fn max_abs(&self) -> T {
        self.x
            .iter()
            .chain(self.y.iter())
            .fold(T::zero(), |a, &v| a.max(v.abs()))
    }
}

/// Symmetric m-by-m tensor field. For m = 1 only `xx` is meaningful; `xy`
/// and `yy` are kept zero so 2D code paths degrade transparently.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField<T> {
    pub grid: Grid<T>,
    pub xx: Vec<T>,
    pub xy: Vec<T>,
    pub yy: Vec<T>,
}

impl<T: Real> SymTensorField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let z = vec![T::zero(); grid.nodes()];
        SymTensorField { grid, xx: z.clone(), xy: z.clone(), yy: z }
    }

    /// Constant multiple of the identity (flat background tensor).
    pub fn isotropic(grid: Grid<T>, c: T) -> Self {
        let n = grid.nodes();
        let yy = if grid.dim() == 2 { vec![c; n] } else { vec![T::zero(); n] };
        SymTensorField { grid, xx: vec![c; n], xy: vec![T::zero(); n], yy }
    }

    pub fn is_finite(&self) -> bool {
        self.xx.iter().chain(&self.xy).chain(&self.yy).all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.xx
            .iter()
            .chain(&self.xy)
            .chain(&self.yy)
            .fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    /// Quadratic form T(V, V) at a node for covariant components and a
    /// contravariant vector.
    #[inline]
    pub fn quad(&self, k: usize, vx: T, vy: T) -> T {
        self.xx[k] * vx * vx + (self.xy[k] + self.xy[k]) * vx * vy + self.yy[k] * vy * vy
    }

    pub fn axpy(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.xx.iter_mut().zip(&other.xx) {
            *a += alpha * b;
        }
        for (a, &b) in self.xy.iter_mut().zip(&other.xy) {
            *a += alpha * b;
        }
        for (a, &b) in self.yy.iter_mut().zip(&other.yy) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, s: T) {
        for v in self.xx.iter_mut().chain(&mut self.xy).chain(&mut self.yy) {
            *v *= s;
        }
    }
}
