//! Floating-point abstraction shared by the physics and network code.

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar usable across traces, images, and network tensors.
///
/// Implemented for `f32` and `f64`. The two conversion helpers avoid the
/// `Option` plumbing of `num_traits::cast` at call sites; every value that
/// flows through them is a finite constant or a measurement in range for
/// both widths.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ScalarOperand
    + LinalgScalar
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
    fn of(v: f64) -> Self;
    fn f64(self) -> f64;

    /// `sin` and `cos` in one call where the platform provides it.
    #[inline]
    fn sin_cos_(self) -> (Self, Self) {
        self.sin_cos()
    }
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn f64(self) -> f64 {
        self
    }
}
