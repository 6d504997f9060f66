//! Scalar abstraction shared by every numerical module.
//!
//! All math in this crate is written against [`Real`], which is implemented
//! for `f32` and `f64`. The double-precision aliases at the crate root are
//! what the tolerances in the test suites are calibrated for.

use std::fmt;

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the dense linear algebra and the compiler.
pub trait Real:
    RealField + Copy + Default + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite value")
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable integer")
    }

    /// Loosest tolerance the type can honour for a nominal double-precision bound.
    #[inline]
    fn tolerance(nominal: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(1e3);
        Self::lit(nominal).max(floor)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{i phase}`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

#[inline]
pub fn carg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}
