//! Scalar abstraction: the whole numerical stack is generic over the
//! floating-point type through this trait.

use num_traits::{Float, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable by fields, operators and solvers.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; panics only for exotic scalar types
    /// that cannot represent ordinary constants.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("constant not representable")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Shorthand for pulling an `f64` constant into the generic scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::of(x)
}
