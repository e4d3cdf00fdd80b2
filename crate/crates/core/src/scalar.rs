//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or parameter.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable in every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps a torus coordinate difference into `[-1/2, 1/2)`.
#[inline]
pub fn min_image<T: Real>(delta: T) -> T {
    delta - (delta + T::of(0.5)).floor()
}

/// Wraps a torus coordinate into `[0, 1)`.
#[inline]
pub fn wrap_unit<T: Real>(x: T) -> T {
    x - x.floor()
}

/// Euclidean distance between two torus points under the minimum-image convention.
pub fn periodic_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let dx = min_image(x - y);
            dx * dx
        })
        .fold(T::zero(), |acc, v| acc + v)
        .sqrt()
}
