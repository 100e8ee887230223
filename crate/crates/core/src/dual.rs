//! Forward-mode dual numbers.
//!
//! A [`Dual<S>`] carries a value and one tangent along a single
//! differentiation direction. Nesting (`Dual<Dual<f64>>`) yields mixed second
//! derivatives: seed the inner tangent along direction `j` and the outer along
//! direction `i`, and the tangent of the tangent is `∂²f/∂xᵢ∂xⱼ`.
//!
//! Position maps are written once against the [`Real`] trait and evaluated
//! with `f64`, `Dual<f64>` or `Dual<Dual<f64>>` as needed.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar field that position maps are generic over.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(v: f64) -> Self;
    /// The innermost real part.
    fn real(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Real for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn real(&self) -> f64 {
        *self
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
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Real> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    /// A variable: unit tangent.
    pub fn variable(re: S) -> Self {
        Dual {
            re,
            eps: S::constant(1.0),
        }
    }

    pub fn constant_of(re: S) -> Self {
        Dual {
            re,
            eps: S::constant(0.0),
        }
    }
}

impl<S: Real> Add for Dual<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<S: Real> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<S: Real> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<S: Real> Div for Dual<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let re = self.re / o.re;
        Dual::new(re, (self.eps - re * o.eps) / o.re)
    }
}

impl<S: Real> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<S: Real> Add<f64> for Dual<S> {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Dual::new(self.re + o, self.eps)
    }
}

impl<S: Real> Sub<f64> for Dual<S> {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Dual::new(self.re - o, self.eps)
    }
}

impl<S: Real> Mul<f64> for Dual<S> {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Dual::new(self.re * o, self.eps * o)
    }
}

impl<S: Real> Div<f64> for Dual<S> {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        Dual::new(self.re / o, self.eps / o)
    }
}

impl<S: Real> Real for Dual<S> {
    fn constant(v: f64) -> Self {
        Dual::constant_of(S::constant(v))
    }
    fn real(&self) -> f64 {
        self.re.real()
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        Dual::new(t, self.eps * (t * t + 1.0))
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s * 2.0))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        Dual::new(self.re.powi(n), self.eps * self.re.powi(n - 1) * (n as f64))
    }
}

/// First derivative of a scalar function at `x`.
pub fn derivative<F>(f: F, x: f64) -> f64
where
    F: Fn(Dual<f64>) -> Dual<f64>,
{
    f(Dual::variable(x)).eps
}

/// Second derivative of a scalar function at `x`, via a nested dual.
pub fn second_derivative<F>(f: F, x: f64) -> f64
where
    F: Fn(Dual<Dual<f64>>) -> Dual<Dual<f64>>,
{
    let inner = Dual::variable(x);
    let outer = Dual::new(inner, Dual::constant_of(1.0));
    f(outer).eps.eps
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn polynomial_derivatives() {
        // f = x³ − 2x, f' = 3x² − 2, f'' = 6x
        assert_relative_eq!(derivative(|x| x.powi(3) - x * 2.0, 1.5), 4.75);
        assert_relative_eq!(second_derivative(|x| x.powi(3) - x * 2.0, 1.5), 9.0);
    }

    #[test]
    fn transcendental_chain_rule() {
        let x = 0.7_f64;
        assert_relative_eq!(derivative(|v| v.sin().sqrt(), x), x.cos() / (2.0 * x.sin().sqrt()), epsilon = 1e-15);
        assert_relative_eq!(derivative(|v| v.tan(), x), 1.0 / (x.cos() * x.cos()), epsilon = 1e-14);
        assert_relative_eq!(derivative(|v| (v * 3.0).exp().ln(), x), 3.0, epsilon = 1e-14);
        assert_relative_eq!(second_derivative(|v| v.cos(), x), -x.cos(), epsilon = 1e-15);
        assert_relative_eq!(second_derivative(|v| v.sqrt(), x), -0.25 * x.powf(-1.5), epsilon = 1e-14);
    }

    #[test]
    fn sqrt_of_negative_is_not_finite() {
        assert!(!derivative(|v| v.sqrt(), -1.0).is_finite());
    }

    #[test]
    fn division_rule() {
        // (1/x)' = −1/x², (1/x)'' = 2/x³
        assert_relative_eq!(derivative(|v| Dual::constant(1.0) / v, 2.0), -0.25);
        assert_relative_eq!(second_derivative(|v| Dual::constant(1.0) / v, 2.0), 0.25);
    }

    proptest! {
        #[test]
        fn product_rule_holds(a in -5.0..5.0f64, b in -5.0..5.0f64, da in -3.0..3.0f64, db in -3.0..3.0f64) {
            let p = Dual::new(a, da) * Dual::new(b, db);
            prop_assert_eq!(p.re, a * b);
            prop_assert_eq!(p.eps, a * db + da * b);
        }

        #[test]
        fn sin_cos_identity_has_zero_derivative(x in -10.0..10.0f64) {
            let d = derivative(|v| v.sin() * v.sin() + v.cos() * v.cos(), x);
            prop_assert!(d.abs() < 1e-14);
        }
    }
}
