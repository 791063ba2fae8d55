//! Scalar abstractions.
//!
//! Path geometry and the pathwise constructions only need ring operations and
//! an order, so they run over exact types (`i64`, `Rational64`) as well as
//! floats. Samplers and matrix factorizations additionally need [`Real`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered ring element usable as a path coordinate.
pub trait Scalar: Num + Copy + PartialOrd + Neg<Output = Self> + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + Neg<Output = T> + Debug + Send + Sync + 'static {}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FromPrimitive + ToPrimitive + Display {
    /// Lossy conversion from `f64`, used for literals and sampled variates.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}
