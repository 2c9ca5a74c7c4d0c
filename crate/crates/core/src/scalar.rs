//! Scalar abstraction shared by every routine in the crate.

use std::fmt::{Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the decompositions are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are carried as `f64` and
/// converted with [`lit`] at the point of use.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp {}

impl<T> Scalar for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp {}

/// Converts an `f64` constant into the working scalar.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Converts a working scalar back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
