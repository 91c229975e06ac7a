//! Discrete Riemannian geometry on flat periodic grids: metric fields,
//! curvature, gradients, integrals and the coupling-map tensors.

mod field;
mod grid;
mod metric;
mod ops;

pub use field::{ScalarField, SymTensorField, VectorField};
pub use grid::Grid;
pub use metric::MetricField;
pub use ops::{
    coupling_tensors, face_grad_sq, grad_norm_sq, gradient, integrate, l2_norm, laplace_beltrami,
    p_dirichlet_energy, p_laplacian, ricci_and_scalar, tension_field, volume,
};
