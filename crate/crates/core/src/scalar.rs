//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
///
/// Linear algebra goes through `nalgebra`, so the bound is `RealField`;
/// literal constants and output conversion go through `num-traits`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// A requested absolute tolerance, floored at a small multiple of the
    /// type's machine epsilon so that `f64` tolerances stay meaningful for `f32`.
    #[inline]
    fn tol(requested: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(requested);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static
{
}

/// Complex scalar over a [`Real`] component type.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn re<T: Real>(v: T) -> C<T> {
    Complex::new(v, T::zero())
}

#[inline]
pub(crate) fn im<T: Real>(v: T) -> C<T> {
    Complex::new(T::zero(), v)
}

/// A real parameter that may also take the value `+∞`.
///
/// Coupling strengths use the infinite value for the Dirichlet/Neumann
/// decoupling limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> ExtendedReal<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }
}

impl<T> From<T> for ExtendedReal<T> {
    fn from(v: T) -> Self {
        ExtendedReal::Finite(v)
    }
}

impl<T: Real> std::str::FromStr for ExtendedReal<T> {
    type Err = String;

    /// Accepts a decimal number or `inf`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("+inf") {
            return Ok(ExtendedReal::Infinite);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("not a number or 'inf': {s:?}"))?;
        if !v.is_finite() {
            return Err(format!("non-finite value {s:?}; use 'inf'"));
        }
        Ok(ExtendedReal::Finite(T::lit(v)))
    }
}

/// `|z|`.
#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.re.hypot(z.im)
}

/// Principal argument of `z`.
#[inline]
pub fn carg<T: Real>(z: C<T>) -> T {
    z.im.atan2(z.re)
}

/// `r e^{iθ}`.
#[inline]
pub fn polar<T: Real>(r: T, theta: T) -> C<T> {
    Complex::new(r * theta.cos(), r * theta.sin())
}
