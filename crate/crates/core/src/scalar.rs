//! Floating-point abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the spectral routines (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(x, c·ε)`: a tolerance that never drops below the type's resolution.
    #[inline]
    fn tol_floor(x: Self, c: f64) -> Self {
        x.max(Self::epsilon() * Self::lit(c))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for `T::lit`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}
