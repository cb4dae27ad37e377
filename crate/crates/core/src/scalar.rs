//! Scalar algebras the statevector kernels are generic over.
//!
//! Besides plain `f64`/`Complex64`, amplitudes can be second-order truncated
//! Taylor jets in a single real infinitesimal `e` (with `e^3 = 0`). Running a
//! circuit with jet-valued angles yields the output together with its first
//! and second derivative along one input direction, which is what the
//! physics-informed loss needs.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// Real-valued scalar: either `f64` or a real jet.
pub trait RealScalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    fn constant(v: f64) -> Self;

    /// `(cos(self / 2), sin(self / 2))`.
    fn half_cos_sin(self) -> (Self, Self);
}

/// Complex-valued amplitude paired with a real scalar type.
pub trait Amplitude:
    Copy + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + AddAssign
{
    type Real: RealScalar;

    fn zero() -> Self;
    fn one() -> Self;
    fn scale(self, r: Self::Real) -> Self;
    /// Multiply by the imaginary unit.
    fn mul_i(self) -> Self;
    /// `conj(self) * other`, conjugating complex parts only.
    fn conj_mul(self, other: Self) -> Self;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
}

impl RealScalar for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }

    #[inline]
    fn half_cos_sin(self) -> (Self, Self) {
        let (s, c) = (0.5 * self).sin_cos();
        (c, s)
    }
}

impl Amplitude for Complex64 {
    type Real = f64;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline]
    fn scale(self, r: f64) -> Self {
        self * r
    }
    #[inline]
    fn mul_i(self) -> Self {
        Complex64::new(-self.im, self.re)
    }
    #[inline]
    fn conj_mul(self, other: Self) -> Self {
        self.conj() * other
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
}

/// Real second-order jet `c[0] + c[1] e + c[2] e^2`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jet(pub [f64; 3]);

impl Jet {
    pub fn new(value: f64, slope: f64) -> Self {
        Jet([value, slope, 0.0])
    }

    pub fn value(self) -> f64 {
        self.0[0]
    }

    /// First derivative along the jet direction.
    pub fn first(self) -> f64 {
        self.0[1]
    }

    /// Second derivative along the jet direction.
    pub fn second(self) -> f64 {
        2.0 * self.0[2]
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        Jet([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        Jet([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        Jet([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, r: f64) -> Jet {
        Jet([self.0[0] * r, self.0[1] * r, self.0[2] * r])
    }
}

impl RealScalar for Jet {
    fn constant(v: f64) -> Self {
        Jet([v, 0.0, 0.0])
    }

    fn half_cos_sin(self) -> (Self, Self) {
        // cos/sin of a0/2 + h e + k e^2 with h = a1/2, k = a2/2.
        let (s, c) = (0.5 * self.0[0]).sin_cos();
        let h = 0.5 * self.0[1];
        let k = 0.5 * self.0[2];
        let cos = Jet([c, -s * h, -s * k - 0.5 * c * h * h]);
        let sin = Jet([s, c * h, c * k - 0.5 * s * h * h]);
        (cos, sin)
    }
}

/// Complex second-order jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexJet(pub [Complex64; 3]);

impl Add for ComplexJet {
    type Output = ComplexJet;
    #[inline]
    fn add(self, o: Self) -> Self {
        ComplexJet([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for ComplexJet {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ComplexJet {
    type Output = ComplexJet;
    #[inline]
    fn sub(self, o: Self) -> Self {
        ComplexJet([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for ComplexJet {
    type Output = ComplexJet;
    #[inline]
    fn neg(self) -> Self {
        ComplexJet([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Amplitude for ComplexJet {
    type Real = Jet;

    fn zero() -> Self {
        ComplexJet([Complex64::new(0.0, 0.0); 3])
    }

    fn one() -> Self {
        let z = Complex64::new(0.0, 0.0);
        ComplexJet([Complex64::new(1.0, 0.0), z, z])
    }

    #[inline]
    fn scale(self, r: Jet) -> Self {
        let (a, b) = (self.0, r.0);
        ComplexJet([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }

    #[inline]
    fn mul_i(self) -> Self {
        ComplexJet(self.0.map(|z| Complex64::new(-z.im, z.re)))
    }

    #[inline]
    fn conj_mul(self, other: Self) -> Self {
        let (a, b) = (self.0.map(|z| z.conj()), other.0);
        ComplexJet([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }

    fn re(self) -> Jet {
        Jet(self.0.map(|z| z.re))
    }

    fn im(self) -> Jet {
        Jet(self.0.map(|z| z.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_half_cos_sin_matches_taylor_expansion() {
        // angle(t) = 0.7 + 1.3 t, evaluate cos(angle/2) derivatives analytically.
        let a = Jet::new(0.7, 1.3);
        let (c, s) = a.half_cos_sin();
        let h = 0.65_f64;
        assert!((c.value() - 0.35_f64.cos()).abs() < 1e-15);
        assert!((c.first() + h * 0.35_f64.sin()).abs() < 1e-15);
        assert!((c.second() + h * h * 0.35_f64.cos()).abs() < 1e-15);
        assert!((s.first() - h * 0.35_f64.cos()).abs() < 1e-15);
        assert!((s.second() + h * h * 0.35_f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn jet_product_rule() {
        let a = Jet([1.0, 2.0, 3.0]);
        let b = Jet([4.0, 5.0, 6.0]);
        assert_eq!((a * b).0, [4.0, 13.0, 6.0 + 10.0 + 12.0]);
    }
}
