//! Scalar abstraction for the floating-point routes.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar usable throughout the numeric routes.
///
/// Implemented for `f32` and `f64`; the exact routes use rationals instead
/// and do not go through this trait.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Significant decimal digits that round-trip through text exactly.
    const ROUND_TRIP_DIGITS: usize;
}

impl Real for f32 {
    const ROUND_TRIP_DIGITS: usize = 9;
}

impl Real for f64 {
    const ROUND_TRIP_DIGITS: usize = 17;
}

/// Lossless-enough conversion from `f64` literals into the working scalar.
pub fn scalar<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("finite f64 converts to any Real")
}

/// Conversion from counts into the working scalar.
pub fn scalar_from_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("usize in range of any Real")
}
