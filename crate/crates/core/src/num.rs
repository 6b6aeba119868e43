//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

/// Floating point scalar the samplers are generic over: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + core::ops::AddAssign
    + core::ops::SubAssign
    + core::ops::MulAssign
    + core::ops::DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion used for error messages and reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Uniform variate in `[0, 1)`, drawn as `f64` and narrowed.
#[inline]
pub(crate) fn uniform<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R) -> T {
    let u = T::lit(rng.gen::<f64>());
    // f32 narrowing may round up to 1.
    if u >= T::one() {
        T::one() - T::epsilon()
    } else {
        u
    }
}

/// Numerically stable `ln(exp(a) + exp(b) + ...)`.
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let max = values
        .iter()
        .copied()
        .fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
    if max == T::neg_infinity() || max.is_infinite() {
        return max;
    }
    let sum = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - max).exp());
    max + sum.ln()
}
