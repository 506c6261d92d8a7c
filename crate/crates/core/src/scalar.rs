//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type used for field coefficients, collocation values and time
/// stepping. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FloatConst + FftNum + FromPrimitive + ToPrimitive + Sum + Default + Display + Debug
{
    /// Lossy conversion from an `f64` literal or parameter.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every float type")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable in every float type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + FftNum + FromPrimitive + ToPrimitive + Sum + Default + Display + Debug
{
}
