//! Floating point abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Maps an angle into `[0, 2π)`.
pub fn normalize_angle<T: Scalar>(angle: T) -> T {
    let tau = T::TAU();
    let mut wrapped = angle % tau;
    if wrapped < T::zero() {
        wrapped = wrapped + tau;
    }
    // `-tiny % tau + tau` rounds to `tau`
    if wrapped >= tau {
        wrapped = wrapped - tau;
    }
    wrapped
}

/// Maps an angle difference into `[-π, π)`.
pub fn wrap_pi<T: Scalar>(angle: T) -> T {
    normalize_angle(angle + T::PI()) - T::PI()
}
