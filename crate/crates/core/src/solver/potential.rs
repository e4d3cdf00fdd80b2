//! Double-well potential `W(s) = (1 - s^2)^2 / 2` and its companions.

use crate::scalar::Real;

#[inline]
pub fn potential_w<T: Real>(s: T) -> T {
    let a = T::one() - s * s;
    T::of(0.5) * a * a
}

/// `W'(s) = -2 s (1 - s^2)`.
#[inline]
pub fn potential_w_prime<T: Real>(s: T) -> T {
    -T::of(2.0) * s * (T::one() - s * s)
}

/// `sqrt(2 W(s)) = |1 - s^2|`, written without a square root so it stays
/// smooth at the wells.
#[inline]
pub fn sqrt_two_w<T: Real>(s: T) -> T {
    (T::one() - s * s).abs()
}

/// `k(s) = int_0^s sqrt(2 W) = s - s^3 / 3`.
#[inline]
pub fn k_of<T: Real>(s: T) -> T {
    s - s * s * s / T::of(3.0)
}

/// `sigma = int_{-1}^{1} sqrt(2 W(s)) ds = 4/3`.
#[inline]
pub fn sigma<T: Real>() -> T {
    T::of(4.0) / T::of(3.0)
}
