//! Floating-point scalar abstraction.
//!
//! All numeric code in this workspace is generic over [`Scalar`] so that
//! verification paths can run in f64 while training loops run in f32.

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// A floating-point scalar: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from f64 (exact for f64, rounded for f32).
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 -> Scalar conversion")
    }

    /// Widening conversion to f64.
    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("Scalar -> f64 conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Cast a slice elementwise between scalar types.
pub fn cast_slice<A: Scalar, B: Scalar>(src: &[A]) -> Vec<B> {
    src.iter().map(|&v| B::from_f64_lossy(v.to_f64_lossy())).collect()
}
