//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real floating-point scalar used for designs, signals and bounds.
///
/// Implemented for `f32` and `f64`. Accuracy targets quoted in the docs
/// (for example the 1e-12 contract of [`crate::std_normal_cdf`]) assume `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold,
    /// which never happens for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn pow2(self) -> Self {
        self * self
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
}

/// `2^k` as a scalar. Exact for every `k` used here (k ≤ 48).
#[inline]
pub(crate) fn pow2i<T: Real>(k: usize) -> T {
    T::lit((k as f64).exp2())
}
