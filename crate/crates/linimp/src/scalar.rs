//! Scalar abstraction so the integrators run over real or complex state spaces.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field element of a state space: `f64` for real problems, `Complex64` for
/// complex ones (e.g. nonlinear Schrödinger).
pub trait Scalar:
    Copy
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(x: f64) -> Self;
    /// Real part.
    fn re(self) -> f64;
    /// Imaginary part (zero for real scalars).
    fn im(self) -> f64;
    /// Modulus |x|.
    fn modulus(self) -> f64;
    /// |x|^2 without the square root.
    fn modulus_sq(self) -> f64;
    fn is_finite_val(self) -> bool;
    /// Multiplication by a real number.
    fn scale(self, s: f64) -> Self;
    fn exp(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn modulus_sq(self) -> f64 {
        self * self
    }
    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn modulus_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite_val(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
}

/// Discrete L2 norm sqrt(w * sum |v_k|^2) with grid weight `w`.
pub fn weighted_l2_norm<S: Scalar>(v: &[S], weight: f64) -> f64 {
    (weight * v.iter().map(|x| x.modulus_sq()).sum::<f64>()).sqrt()
}

/// Discrete L2 distance between two vectors of equal length.
pub fn weighted_l2_dist<S: Scalar>(a: &[S], b: &[S], weight: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).modulus_sq())
        .sum();
    (weight * s).sqrt()
}

pub fn max_norm<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}
