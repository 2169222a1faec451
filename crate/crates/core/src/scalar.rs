//! Scalar abstraction shared by the numerical kernels.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the kernels are written against: `f32` or `f64`.
///
/// Tolerances in this crate are tuned for `f64`; `f32` instantiations are
/// useful for smoke tests and plotting grids, not for verification.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
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
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Snaps `x ∈ [0, 1]` to the grid `k·ε/2` (`k·2⁻⁵³` for `f64`), on which
/// `1 − x` is exact.
///
/// Every abscissa stored in a trajectory goes through this, so reflecting a
/// solution about `x = 1/2` twice is the identity bit for bit.
pub fn snap_unit<T: Scalar>(x: T) -> T {
    let scale = T::lit(2.0) / T::epsilon();
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapped_values_reflect_exactly() {
        for &x in &[0.1_f64, 0.3, 1.0 / 3.0, 0.123_456_789, 0.25, 1e-9] {
            let s = snap_unit(x);
            assert!((s - x).abs() <= 2.0 * f64::EPSILON);
            let r = 1.0 - s;
            assert_eq!(1.0 - r, s);
        }
    }
}
