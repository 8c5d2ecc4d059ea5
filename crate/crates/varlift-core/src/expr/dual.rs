//! Forward-mode dual numbers, nestable for higher derivatives.
//!
//! A `Dual<f64>` carries a value and one directional derivative. Nesting
//! (`Dual<Dual<f64>>`) gives mixed second partials, and so on. All expression
//! evaluation is generic over [`AdScalar`], so the same interpreter produces
//! values, Jacobians, and Hessians.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar types the expression evaluator can run on.
///
/// `primal` drills down to the innermost `f64`; domain checks are performed
/// against that value so a derivative evaluation fails exactly where the
/// underlying point is outside the domain.
pub trait AdScalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Innermost real part.
    fn primal(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    /// `self` raised to a constant exponent.
    fn powf_const(self, e: f64) -> Self;
}

impl AdScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn primal(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf_const(self, e: f64) -> Self {
        f64::powf(self, e)
    }
}

/// Value plus one directional derivative over the base scalar `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: AdScalar> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Dual { re, du }
    }

    /// Constant: derivative zero.
    pub fn constant(v: f64) -> Self {
        Dual {
            re: T::from_f64(v),
            du: T::from_f64(0.0),
        }
    }

    /// Seed variable: derivative one.
    pub fn seeded(v: T) -> Self {
        Dual {
            re: v,
            du: T::from_f64(1.0),
        }
    }
}

impl<T: AdScalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.re + rhs.re, self.du + rhs.du)
    }
}

impl<T: AdScalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.re - rhs.re, self.du - rhs.du)
    }
}

impl<T: AdScalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual::new(self.re * rhs.re, self.du * rhs.re + self.re * rhs.du)
    }
}

impl<T: AdScalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.re / rhs.re;
        Dual::new(q, (self.du - q * rhs.du) / rhs.re)
    }
}

impl<T: AdScalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.du)
    }
}

impl<T: AdScalar> AdScalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }

    fn primal(self) -> f64 {
        self.re.primal()
    }

    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.re.cos() * self.du)
    }

    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -self.re.sin() * self.du)
    }

    fn tan(self) -> Self {
        let c = self.re.cos();
        Dual::new(self.re.tan(), self.du / (c * c))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, e * self.du)
    }

    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.du / self.re)
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.du / (T::from_f64(2.0) * s))
    }

    fn tanh(self) -> Self {
        let t = self.re.tanh();
        Dual::new(t, (T::from_f64(1.0) - t * t) * self.du)
    }

    fn abs(self) -> Self {
        // Derivative of |x| is sign(x); at 0 we take +1 so |x| behaves like x near 0+.
        if self.re.primal() >= 0.0 {
            Dual::new(self.re.abs(), self.du)
        } else {
            Dual::new(self.re.abs(), -self.du)
        }
    }

    fn powf_const(self, e: f64) -> Self {
        if e == 0.0 {
            return Dual::constant(1.0);
        }
        let p = self.re.powf_const(e);
        let dp = T::from_f64(e) * self.re.powf_const(e - 1.0) * self.du;
        Dual::new(p, dp)
    }
}
