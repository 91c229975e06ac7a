use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Uniform periodic grid on the flat m-torus, m in {1, 2}.
///
/// The same node count `n` is used per axis. For m = 1 the grid behaves as an
/// n-by-1 array with the second axis collapsed, so index arithmetic and stencil
/// code are dimension-agnostic (all y-differences vanish identically).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    m: usize,
    n: usize,
    len: [T; 2],
}

impl<T: Real> Grid<T> {
    pub fn new(m: usize, n: usize, l1: T, l2: T) -> Result<Self> {
        if m != 1 && m != 2 {
            return Err(Error::InvalidParam(format!("grid dimension m = {m}, expected 1 or 2")));
        }
        if n < 8 {
            return Err(Error::InvalidParam(format!("grid resolution n = {n} < 8")));
        }
        if l1 <= T::zero() || (m == 2 && l2 <= T::zero()) {
            return Err(Error::InvalidParam("axis lengths must be positive".into()));
        }
        let len = if m == 1 { [l1, T::one()] } else { [l1, l2] };
        Ok(Grid { m, n, len })
    }

    pub fn circle(n: usize, l: T) -> Result<Self> {
        Self::new(1, n, l, T::one())
    }

    pub fn torus(n: usize, l1: T, l2: T) -> Result<Self> {
        Self::new(2, n, l1, l2)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.n
    }

    /// Node count along the second axis (1 when m = 1).
    #[inline]
    pub fn ny(&self) -> usize {
        if self.m == 2 {
            self.n
        } else {
            1
        }
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.nx() * self.ny()
    }

    #[inline]
    pub fn length(&self, axis: usize) -> T {
        self.len[axis]
    }

    /// Grid spacing along `axis`. The collapsed axis of a circle reports 1 so
    /// that cell measures stay well-defined.
    #[inline]
    pub fn h(&self, axis: usize) -> T {
        if axis == 1 && self.m == 1 {
            T::one()
        } else {
            self.len[axis] / real::<T>(self.n as f64)
        }
    }

    /// Cell measure h1 * h2 (just h1 for m = 1).
    #[inline]
    pub fn cell(&self) -> T {
        self.h(0) * self.h(1)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    /// Periodic shift of an axis index by a signed offset.
    #[inline]
    pub fn wrap(&self, i: usize, d: isize, axis: usize) -> usize {
        let n = if axis == 0 { self.nx() } else { self.ny() } as isize;
        (((i as isize + d) % n + n) % n) as usize
    }

    /// Coordinate of node (i, j).
    #[inline]
    pub fn coord(&self, i: usize, j: usize) -> (T, T) {
        (real::<T>(i as f64) * self.h(0), real::<T>(j as f64) * self.h(1))
    }
}
