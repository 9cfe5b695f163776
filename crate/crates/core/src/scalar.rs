//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// All physics in this crate is written against this trait. Tolerances that
/// the algorithms need internally are expressed through [`Real::tol`] so that
/// single precision degrades gracefully instead of looping forever on targets
/// it cannot reach.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Requested tolerance, floored at a small multiple of machine epsilon.
    #[inline]
    fn tol(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(16.0);
        Self::lit(requested).max(floor)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Half-integer quantum number stored as twice its value.
///
/// Spin projections `m` on a block of `n` spins range over
/// `-n/2, -n/2 + 1, ..., n/2`; storing `2m` keeps them exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value<T: Real>(self) -> T {
        T::from_i64(self.0).expect("i64 representable") / T::lit(2.0)
    }
}

impl Display for HalfInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_floor_depends_on_precision() {
        assert_eq!(f64::tol(1e-9), 1e-9);
        assert!(f32::tol(1e-12) > 1e-12);
    }

    #[test]
    fn half_int_roundtrip() {
        let m = HalfInt::from_twice(-3);
        assert_eq!(m.value::<f64>(), -1.5);
        assert_eq!(m.to_string(), "-3/2");
        assert_eq!(HalfInt(4).to_string(), "2");
    }
}
