//! Floating-point abstraction shared by every solver.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used by the model, the Riemann solver and both schemes.
///
/// Implemented for `f32` and `f64`. Configuration and I/O stay in `f64`;
/// conversions go through [`Scalar::lit`] and [`Scalar::to_f64_lossy`].
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or configuration value.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }

    fn quarter() -> Self {
        Self::lit(0.25)
    }

    /// Relative tolerance `rel`, raised to a few ulps when the type cannot
    /// resolve it.
    fn rel_tol(rel: f64) -> Self {
        Self::lit(rel).max(Self::lit(16.0) * Self::epsilon())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Scalar>::quarter() * f64::two(), f64::half());
        assert_eq!(1.5f32.to_f64_lossy(), 1.5);
    }
}
