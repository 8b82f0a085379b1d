//! Forward-mode dual numbers that nest to any order.
//!
//! `Dual<f64>` carries a first derivative, `Dual<Dual<f64>>` a mixed second
//! derivative and `Dual<Dual<Dual<f64>>>` a mixed third derivative. Every
//! perturbation slot is an independent infinitesimal, so seeding different
//! slots with different directions yields exact mixed directional derivatives.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::field::{ScalarField, TangentFunction};

/// Real-like scalar that model code is written against.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(v: f64) -> Self;
    /// Value with every infinitesimal part dropped; used for branching.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn atan(self) -> Self;
    /// Evaluate a type-erased tangent function at this scalar type.
    fn call_tangent(f: &dyn TangentFunction, x: &[Self], v: &[Self]) -> Self;
    /// Evaluate a type-erased scalar field at this scalar type.
    fn call_field(f: &dyn ScalarField, x: &[Self]) -> Self;
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::cst(1.0),
            n if n < 0 => self.powi(-n).recip(),
            _ => {
                let mut acc = self;
                for _ in 1..n {
                    acc *= self;
                }
                acc
            }
        }
    }
    fn sq(self) -> Self {
        self * self
    }
    /// Absolute value; the derivative at an exact zero is taken from the right.
    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }
    /// Smooth branch selection on the real part.
    fn max_re(self, other: Self) -> Self {
        if self.re() >= other.re() {
            self
        } else {
            other
        }
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn atan(self) -> Self {
        f64::atan(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn call_tangent(f: &dyn TangentFunction, x: &[Self], v: &[Self]) -> Self {
        f.eval_f64(x, v)
    }
    fn call_field(f: &dyn ScalarField, x: &[Self]) -> Self {
        f.eval_f64(x)
    }
}

/// `re + du·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

pub type D1 = Dual<f64>;
pub type D2 = Dual<D1>;
pub type D3 = Dual<D2>;

impl<T: Scalar> Dual<T> {
    #[inline]
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }

    #[inline]
    pub fn constant(re: T) -> Self {
        Self { re, du: T::cst(0.0) }
    }

    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self { re: f, du: self.du * df }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.du + self.du * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Self::new(q, (self.du - q * o.du) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Self::new(self.re + o, self.du)
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Self::new(self.re - o, self.du)
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Self::new(self.re * o, self.du * o)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        Self::new(self.re / o, self.du / o)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

macro_rules! dual_scalar {
    ($ty:ty, $tangent:ident, $field:ident) => {
        impl Scalar for $ty {
            #[inline]
            fn cst(v: f64) -> Self {
                Self::constant(Scalar::cst(v))
            }
            #[inline]
            fn re(&self) -> f64 {
                self.re.re()
            }
            fn sqrt(self) -> Self {
                let s = self.re.sqrt();
                self.chain(s, (s * 2.0).recip())
            }
            fn exp(self) -> Self {
                let e = self.re.exp();
                self.chain(e, e)
            }
            fn ln(self) -> Self {
                self.chain(self.re.ln(), self.re.recip())
            }
            fn sin(self) -> Self {
                self.chain(self.re.sin(), self.re.cos())
            }
            fn cos(self) -> Self {
                self.chain(self.re.cos(), -self.re.sin())
            }
            fn sinh(self) -> Self {
                self.chain(self.re.sinh(), self.re.cosh())
            }
            fn cosh(self) -> Self {
                self.chain(self.re.cosh(), self.re.sinh())
            }
            fn atan(self) -> Self {
                self.chain(self.re.atan(), (self.re * self.re + 1.0).recip())
            }
            fn powi(self, n: i32) -> Self {
                if n == 0 {
                    return Self::cst(1.0);
                }
                let p = self.re.powi(n - 1);
                self.chain(p * self.re, p * (n as f64))
            }
            fn call_tangent(f: &dyn TangentFunction, x: &[Self], v: &[Self]) -> Self {
                f.$tangent(x, v)
            }
            fn call_field(f: &dyn ScalarField, x: &[Self]) -> Self {
                f.$field(x)
            }
        }
    };
}

dual_scalar!(D1, eval_d1, eval_d1);
dual_scalar!(D2, eval_d2, eval_d2);
dual_scalar!(D3, eval_d3, eval_d3);

/// Lift an `f64` slice into constants of type `S`.
pub fn lift<S: Scalar>(xs: &[f64]) -> Vec<S> {
    xs.iter().map(|&x| S::cst(x)).collect()
}

/// `base + ε·dir` as first-order duals.
pub fn seed1(base: &[f64], dir: &[f64]) -> Vec<D1> {
    base.iter().zip(dir).map(|(&b, &d)| D1::new(b, d)).collect()
}

/// `base + ε₁·a + ε₂·b` as second-order duals.
pub fn seed2(base: &[f64], a: &[f64], b: &[f64]) -> Vec<D2> {
    base.iter()
        .zip(a.iter().zip(b))
        .map(|(&x, (&da, &db))| D2::new(D1::new(x, db), D1::new(da, 0.0)))
        .collect()
}

/// `base + ε₁·a + ε₂·b + ε₃·c` as third-order duals.
pub fn seed3(base: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> Vec<D3> {
    base.iter()
        .enumerate()
        .map(|(i, &x)| {
            D3::new(
                D2::new(D1::new(x, c[i]), D1::new(b[i], 0.0)),
                D2::new(D1::new(a[i], 0.0), D1::cst(0.0)),
            )
        })
        .collect()
}

/// Coefficient of `ε₁ε₂` in a second-order dual.
#[inline]
pub fn mixed2(v: D2) -> f64 {
    v.du.du
}

/// Coefficient of `ε₁` alone.
#[inline]
pub fn first_of2(v: D2) -> f64 {
    v.du.re
}

/// Coefficient of `ε₂` alone.
#[inline]
pub fn second_of2(v: D2) -> f64 {
    v.re.du
}

/// Coefficient of `ε₁ε₂ε₃` in a third-order dual.
#[inline]
pub fn mixed3(v: D3) -> f64 {
    v.du.du.du
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly<S: Scalar>(x: S, y: S, z: S) -> S {
        x * x * y + (y * z).sin() + z.exp() * x
    }

    #[test]
    fn first_derivative_matches_analytic() {
        let x = D1::new(1.3, 1.0);
        let f = (x * x).sin() + x.sqrt();
        let expected = 2.0 * 1.3 * (1.3f64 * 1.3).cos() + 0.5 / 1.3f64.sqrt();
        assert!((f.du - expected).abs() < 1e-14);
    }

    #[test]
    fn mixed_second_and_third_derivatives() {
        let (x0, y0, z0) = (0.7, -0.4, 0.3);
        let v2 = seed2(&[x0, y0, z0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        let f2 = poly(v2[0], v2[1], v2[2]);
        // d²/dxdy = 2x
        assert!((mixed2(f2) - 2.0 * x0).abs() < 1e-14);
        let v3 = seed3(&[x0, y0, z0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]);
        let f3 = poly(v3[0], v3[1], v3[2]);
        // d³/dy dz dz of sin(yz) = -2 y... computed by hand:
        // ∂z sin(yz) = y cos(yz); ∂z² = -y² sin(yz); ∂y(-y² sin(yz)) = -2y sin(yz) - y² z cos(yz)
        let expected = -2.0 * y0 * (y0 * z0).sin() - y0 * y0 * z0 * (y0 * z0).cos();
        assert!((mixed3(f3) - expected).abs() < 1e-13);
    }

    #[test]
    fn division_and_powers() {
        let x = D1::new(2.0, 1.0);
        let f = x.powi(3) / (x + 1.0);
        let expected = (3.0 * 4.0 * 3.0 - 8.0) / 9.0;
        assert!((f.du - expected).abs() < 1e-14);
        let g = x.powi(-2);
        assert!((g.du + 2.0 / 8.0).abs() < 1e-15);
    }
}
