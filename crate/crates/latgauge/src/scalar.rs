//! Scalar fields used by the finite-group code paths.
//!
//! Finite-group kernels and operator matrices are generic over [`Scalar`] so
//! the same routines run in double precision or in exact complex-rational
//! arithmetic. Exact mode is what lets the finite checks report a residual of
//! literally zero.

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex<f64>;

/// Gaussian rationals with 128-bit numerators and denominators.
pub type Exact = Complex<Ratio<i128>>;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(re: i64, im: i64) -> Self;
    fn conj(&self) -> Self;
    fn div_int(&self, n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> C64;
    /// Modulus in double precision, used only for reporting.
    fn norm(&self) -> f64 {
        self.to_c64().norm()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_int(re: i64, im: i64) -> Self {
        C64::new(re as f64, im as f64)
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn div_int(&self, n: i64) -> Self {
        self / n as f64
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

impl Scalar for Exact {
    fn zero() -> Self {
        Complex::new(Ratio::zero(), Ratio::zero())
    }
    fn one() -> Self {
        Complex::new(Ratio::one(), Ratio::zero())
    }
    fn from_int(re: i64, im: i64) -> Self {
        Complex::new(Ratio::from_integer(re as i128), Ratio::from_integer(im as i128))
    }
    fn conj(&self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn div_int(&self, n: i64) -> Self {
        let d = Ratio::from_integer(n as i128);
        Complex::new(self.re / d, self.im / d)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn to_c64(&self) -> C64 {
        let f = |r: &Ratio<i128>| *r.numer() as f64 / *r.denom() as f64;
        C64::new(f(&self.re), f(&self.im))
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest modulus of the entrywise difference of two equally sized slices.
pub fn max_diff<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch in residual");
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.clone() - y.clone();
            if d.is_zero() {
                0.0
            } else {
                d.norm().max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}
