//! Numerical laboratory for the first eigenvalue of the coupled
//! (p,q)-Laplacian on discretized closed surfaces, and its evolution under
//! the Ricci flow coupled with harmonic map flow.

pub mod diffgeo;
pub mod error;
pub mod geomflow;
pub mod monitor;
pub mod pqeigen;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Concrete f64 instantiations of the core carriers.
pub type Grid64 = diffgeo::Grid<f64>;
pub type ScalarField64 = diffgeo::ScalarField<f64>;
pub type VectorField64 = diffgeo::VectorField<f64>;
pub type SymTensorField64 = diffgeo::SymTensorField<f64>;
pub type MetricField64 = diffgeo::MetricField<f64>;
pub type EigenParams64 = pqeigen::EigenParams<f64>;
pub type EigenPair64 = pqeigen::EigenPair<f64>;

/// Concrete f32 instantiations.
pub type Grid32 = diffgeo::Grid<f32>;
pub type ScalarField32 = diffgeo::ScalarField<f32>;
pub type MetricField32 = diffgeo::MetricField<f32>;
