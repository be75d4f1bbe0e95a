use std::fmt::{Debug, Display};

use num_traits::Float;

/// Scalar type the whole engine is generic over.
///
/// Implemented for `f32` and `f64`. Training and gradient checks default to
/// `f64`; `f32` is available behind the CLI `precision` switch.
pub trait Real:
    Float + num_traits::NumAssignOps + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

/// Numerically stable logistic function.
///
/// Split on the sign of `x` so the exponential argument is never positive;
/// finite inputs of any magnitude stay finite.
#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Cosine similarity over flat slices.
///
/// Returns 0 when either norm falls below 1e-12: a collapsed feature carries
/// no affinity signal, and the result must stay finite.
pub fn cosine<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut dot = T::zero();
    let mut na = T::zero();
    let mut nb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let na = na.sqrt();
    let nb = nb.sqrt();
    let floor = T::from_f64(1e-12);
    if na < floor || nb < floor {
        T::zero()
    } else {
        dot / (na * nb)
    }
}
