//! Scalar types the expression evaluator is generic over: `f64` and forward-mode duals.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by the evaluator.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when the type carries derivative information, so kinks matter.
    const DIFFERENTIATES: bool;

    fn cst(v: f64) -> Self;
    /// The underlying real value.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;

    fn powi(self, k: i32) -> Self {
        if k < 0 {
            return Self::cst(1.0) / self.powi(-k);
        }
        let mut acc = Self::cst(1.0);
        let mut base = self;
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Real for f64 {
    const DIFFERENTIATES: bool = false;

    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
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
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

/// First-order dual number `re + eps·ε` with `ε² = 0`.
///
/// Nesting `Dual<Dual<f64>>` with independent seeds yields mixed second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    /// Chain rule for a scalar function with value `f` and derivative `df` at `re`.
    fn chain(self, f: T, df: T) -> Self {
        Self {
            re: f,
            eps: df * self.eps,
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Self::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Real> Real for Dual<T> {
    const DIFFERENTIATES: bool = true;

    fn cst(v: f64) -> Self {
        Self::new(T::cst(v), T::cst(0.0))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::cst(1.0) / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }
    fn atan(self) -> Self {
        self.chain(self.re.atan(), T::cst(1.0) / (T::cst(1.0) + self.re * self.re))
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::cst(1.0);
        }
        let prev = self.re.powi(k - 1);
        self.chain(prev * self.re, T::cst(k as f64) * prev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D2 = Dual<Dual<f64>>;

    #[test]
    fn first_derivative_of_product() {
        let x = Dual::new(3.0, 1.0);
        let y = x * x.sin();
        assert!((y.eps - (3f64.sin() + 3.0 * 3f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn nested_gives_second_derivative() {
        let x: D2 = Dual::new(Dual::new(2.0, 1.0), Dual::new(1.0, 0.0));
        let y = x.powi(4);
        assert_eq!(y.re.re, 16.0);
        assert_eq!(y.eps.re, 32.0);
        assert_eq!(y.eps.eps, 48.0);
    }

    #[test]
    fn quotient_rule() {
        let x = Dual::new(2.0, 1.0);
        let y = Dual::cst(1.0) / x;
        assert!((y.eps + 0.25).abs() < 1e-15);
    }
}
