//! Floating-point abstraction shared by every numeric stage.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the pipeline can run on: `f32` or `f64`.
///
/// The two tolerances are per-type because the absolute thresholds that make
/// sense in double precision are unreachable in single precision.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
    fn jacobi_tolerance() -> Self;

    /// Norms below this are treated as zero (loading and score directions).
    fn zero_norm() -> Self;

    /// Extra decimal places used to absorb representation error before
    /// display rounding.
    fn guard_digits() -> i32;

    /// Lossless conversion for small integers and literal constants.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }
}

impl Scalar for f64 {
    fn jacobi_tolerance() -> Self {
        1e-12
    }

    fn zero_norm() -> Self {
        1e-9
    }

    fn guard_digits() -> i32 {
        6
    }
}

impl Scalar for f32 {
    fn jacobi_tolerance() -> Self {
        1e-5
    }

    fn zero_norm() -> Self {
        1e-5
    }

    fn guard_digits() -> i32 {
        2
    }
}

/// Round half away from zero to `decimals` places (display only).
///
/// The value is first rounded to `decimals + guard_digits` places so that an
/// exact half such as `-0.375` still rounds away from zero when it was
/// computed as `-0.37499999999999994`.
pub fn round_half_away<T: Scalar>(x: T, decimals: i32) -> T {
    let ten = T::lit(10.0);
    let guard = ten.powi(T::guard_digits());
    let scale = ten.powi(decimals);
    let shifted = ((x * scale * guard).round() / guard).round();
    shifted / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_away_from_zero() {
        assert_eq!(round_half_away(0.125_f64, 2), 0.13);
        assert_eq!(round_half_away(-0.125_f64, 2), -0.13);
        assert_eq!(round_half_away(70.370_370_f64, 2), 70.37);
        assert_eq!(round_half_away(-0.0386_f64, 2), -0.04);
        assert_eq!(round_half_away(-0.374_999_999_999_999_94_f64, 2), -0.38);
        assert_eq!(round_half_away(0.374_9_f64, 2), 0.37);
    }
}
