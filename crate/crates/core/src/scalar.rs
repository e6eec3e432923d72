//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, RealField};
use num_traits::ToPrimitive;
use std::fmt::LowerExp;

/// Real scalar type the library is generic over (`f32` or `f64`).
///
/// Complex quantities are always `Complex<T>` for some `T: Scalar`.
pub trait Scalar: RealField + Copy + ToPrimitive + LowerExp {
    /// Tolerance for identities that hold exactly in real arithmetic.
    fn exact_tol() -> Self;
    /// Relative threshold below which a singular value counts as zero.
    fn rank_tol() -> Self;

    fn of(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn infinity() -> Self {
        Self::of(f64::INFINITY)
    }

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }

    fn cplx(re: Self, im: Self) -> Complex<Self> {
        Complex::new(re, im)
    }
}

impl Scalar for f64 {
    fn exact_tol() -> Self {
        1e-12
    }
    fn rank_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn exact_tol() -> Self {
        1e-5
    }
    fn rank_tol() -> Self {
        1e-4
    }
}

pub(crate) fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Scalar>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

pub(crate) fn creal<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

pub(crate) fn cabs<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
