//! Second-order forward-mode jets.
//!
//! `Jet<N>` carries a value together with its gradient and Hessian with
//! respect to `N` seed variables, propagated exactly through arithmetic
//! and the elementary functions. `Jet<1>` doubles as a univariate
//! (value, f', f'') carrier; `Jet<2>` differentiates fields in x;
//! `Jet<4>` differentiates Finsler functions in (x1, x2, y1, y2).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar abstraction shared by `f64` and jets, so a formula written once
/// evaluates to values or derivatives depending on the argument type.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    /// Real power; the base is assumed positive when `e` is fractional.
    fn powf(self, e: f64) -> Self;
    /// Compose with a scalar function of `self` given its value and first
    /// two derivatives at `self.value()`.
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Self;
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::from_f64(1.0);
        }
        let mut base = if n < 0 { Self::from_f64(1.0) / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::from_f64(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    fn is_finite(&self) -> bool;
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
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
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powf(self, e: f64) -> Self {
        f64::powf(self, e)
    }
    fn compose(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// Shorthand for lifting a constant into any `Real`.
pub fn c<R: Real>(v: f64) -> R {
    R::from_f64(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        Jet {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    /// Seed variable `i` with value `v` (gradient entry 1, Hessian 0).
    pub fn var(v: f64, i: usize) -> Self {
        let mut j = Jet::constant(v);
        j.g[i] = 1.0;
        j
    }

    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.v`.
    pub fn lift(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
            for j in 0..N {
                out.h[i][j] = f1 * self.h[i][j] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut r = self;
        r.v += o.v;
        for i in 0..N {
            r.g[i] += o.g[i];
            for j in 0..N {
                r.h[i][j] += o.h[i][j];
            }
        }
        r
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut r = self;
        r.v = -r.v;
        for i in 0..N {
            r.g[i] = -r.g[i];
            for j in 0..N {
                r.h[i][j] = -r.h[i][j];
            }
        }
        r
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = Jet::constant(self.v * o.v);
        for i in 0..N {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..N {
                r.h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        r
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let iv = 1.0 / o.v;
        self * o.lift(iv, -iv * iv, 2.0 * iv * iv * iv)
    }
}

impl<const N: usize> Real for Jet<N> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.lift(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.lift(e, e, e)
    }
    fn ln(self) -> Self {
        self.lift(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }
    fn sin(self) -> Self {
        let (s, co) = self.v.sin_cos();
        self.lift(s, co, -s)
    }
    fn cos(self) -> Self {
        let (s, co) = self.v.sin_cos();
        self.lift(co, -s, -co)
    }
    fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return Jet::constant(1.0);
        }
        let f0 = self.v.powf(e);
        let f1 = e * self.v.powf(e - 1.0);
        let f2 = e * (e - 1.0) * self.v.powf(e - 2.0);
        self.lift(f0, f1, f2)
    }
    fn compose(self, f0: f64, f1: f64, f2: f64) -> Self {
        self.lift(f0, f1, f2)
    }
    fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().all(|r| r.iter().all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f<R: Real>(x: R, y: R) -> R {
        (x * y).exp() + x.sin() * y.powf(1.5) - x / y
    }

    #[test]
    fn jet_matches_finite_differences() {
        let (x0, y0) = (0.7, 1.3);
        let j = f(Jet::<2>::var(x0, 0), Jet::<2>::var(y0, 1));
        let h = 1e-5;
        let fd_x = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        let fd_y = (f(x0, y0 + h) - f(x0, y0 - h)) / (2.0 * h);
        let fd_xx = (f(x0 + h, y0) - 2.0 * f(x0, y0) + f(x0 - h, y0)) / (h * h);
        let fd_xy = (f(x0 + h, y0 + h) - f(x0 + h, y0 - h) - f(x0 - h, y0 + h)
            + f(x0 - h, y0 - h))
            / (4.0 * h * h);
        assert!((j.g[0] - fd_x).abs() < 1e-8);
        assert!((j.g[1] - fd_y).abs() < 1e-8);
        assert!((j.h[0][0] - fd_xx).abs() < 1e-5);
        assert!((j.h[0][1] - fd_xy).abs() < 1e-6);
        assert!((j.h[0][1] - j.h[1][0]).abs() < 1e-14);
    }

    #[test]
    fn polynomial_jets_are_exact() {
        // degree-4 polynomial, derivatives must be exact to roundoff
        let p = |x: Jet<2>, y: Jet<2>| x.powi(4) + x.powi(2) * y.powi(2) + y.powi(3);
        let j = p(Jet::var(2.0, 0), Jet::var(3.0, 1));
        assert!((j.v - (16.0 + 36.0 + 27.0)).abs() < 1e-12);
        assert!((j.g[0] - (32.0 + 36.0)).abs() < 1e-12);
        assert!((j.g[1] - (24.0 + 27.0)).abs() < 1e-12);
        assert!((j.h[0][0] - (48.0 + 18.0)).abs() < 1e-12);
        assert!((j.h[0][1] - 24.0).abs() < 1e-12);
        assert!((j.h[1][1] - (8.0 + 18.0)).abs() < 1e-12);
    }

    #[test]
    fn negative_integer_powers() {
        let j = Jet::<1>::var(2.0, 0).powi(-2);
        assert!((j.v - 0.25).abs() < 1e-15);
        assert!((j.g[0] + 0.25).abs() < 1e-15); // d(x^-2) = -2 x^-3 = -0.25
        assert!((j.h[0][0] - 0.375).abs() < 1e-15); // 6 x^-4
    }
}
