//! Scalar abstraction for rate and time arithmetic.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable for rates (bits/s) and times (seconds).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Floor with a small relative slack so that values such as `0.999_999_999_9`
/// produced by rounding land on the integer they represent.
pub(crate) fn slack_floor<T: Real>(x: T) -> T {
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(8.0));
    let slack = tol * (T::one() + x.abs());
    (x + slack).floor()
}
