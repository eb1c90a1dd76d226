//! Floating point scalar abstraction for the numeric half of the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for Sol geometry and the numeric pipeline thresholds.
///
/// Blanket-implemented for every floating point type with the listed
/// capabilities; `f32` and `f64` both qualify. The exact (integer and
/// rational) side of the crate deliberately does not go through this trait.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Copy + Send + Sync + 'static
{
    /// Lossy view as `f64`, for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Construction from `f64` constants.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("scalar constructible from f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Copy + Send + Sync + 'static
{
}
