//! Scalars that carry exact first and mixed second directional derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Add<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn real(&self) -> f64;
    fn sqrt(self) -> Self;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn real(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// `a + b ε₁ + c ε₂ + d ε₁ε₂` with `ε₁² = ε₂² = 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HyperDual {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HyperDual {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Applies a scalar function given its value and first two derivatives at `a`.
    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Self {
            a: f,
            b: f1 * self.b,
            c: f1 * self.c,
            d: f1 * self.d + f2 * self.b * self.c,
        }
    }

    fn recip(self) -> Self {
        let r = 1.0 / self.a;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a,
            self.a * o.b + self.b * o.a,
            self.a * o.c + self.c * o.a,
            self.a * o.d + self.b * o.c + self.c * o.b + self.d * o.a,
        )
    }
}

impl Div for HyperDual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.a * k, self.b * k, self.c * k, self.d * k)
    }
}

impl Add<f64> for HyperDual {
    type Output = Self;
    fn add(self, k: f64) -> Self {
        Self::new(self.a + k, self.b, self.c, self.d)
    }
}

impl Scalar for HyperDual {
    fn cst(v: f64) -> Self {
        Self::new(v, 0.0, 0.0, 0.0)
    }
    fn real(&self) -> f64 {
        self.a
    }
    fn sqrt(self) -> Self {
        let s = self.a.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.a))
    }
}

/// Complex number over a [`Scalar`].
#[derive(Clone, Copy, Debug)]
pub struct Cx<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> Cx<T> {
    pub fn new(re: T, im: T) -> Self {
        Self { re, im }
    }

    pub fn cst(re: f64, im: f64) -> Self {
        Self::new(T::cst(re), T::cst(im))
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.re * k, self.im * k)
    }
}

impl<T: Scalar> Add for Cx<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl<T: Scalar> Sub for Cx<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl<T: Scalar> Mul for Cx<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_partial_of_product_quotient() {
        // f(x, y) = sqrt(x) * y / (x + y) at (2, 3)
        let x = HyperDual::new(2.0, 1.0, 0.0, 0.0);
        let y = HyperDual::new(3.0, 0.0, 1.0, 0.0);
        let f = x.sqrt() * y / (x + y);
        let g = |x: f64, y: f64| x.sqrt() * y / (x + y);
        let h = 1e-4;
        let fx = (g(2.0 + h, 3.0) - g(2.0 - h, 3.0)) / (2.0 * h);
        let fxy = (g(2.0 + h, 3.0 + h) - g(2.0 + h, 3.0 - h) - g(2.0 - h, 3.0 + h) + g(2.0 - h, 3.0 - h))
            / (4.0 * h * h);
        assert!((f.a - g(2.0, 3.0)).abs() < 1e-15);
        assert!((f.b - fx).abs() < 1e-8);
        assert!((f.d - fxy).abs() < 1e-7);
    }
}
