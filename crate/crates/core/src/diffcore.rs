//! Derivative access for scalar fields in x and Finsler functions in
//! (x, y). Production paths are jet-exact; the finite-difference
//! routines at the bottom exist only as test oracles.

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub y1: f64,
    pub y2: f64,
}

impl Direction {
    pub fn new(y1: f64, y2: f64) -> Self {
        Direction { y1, y2 }
    }

    pub fn is_zero(&self) -> bool {
        self.y1 == 0.0 && self.y2 == 0.0
    }

    pub fn norm(&self) -> f64 {
        self.y1.hypot(self.y2)
    }
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Copy, Debug)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

/// The derivative blocks of a Finsler function F(x, y) needed by the
/// Hamel and spray formulas. `f_xy[i][l]` is d2F/dx^i dy^l.
#[derive(Clone, Copy, Debug)]
pub struct MixedJet {
    pub value: f64,
    pub f_x: [f64; 2],
    pub f_y: [f64; 2],
    pub f_yy: [[f64; 2]; 2],
    pub f_xy: [[f64; 2]; 2],
}

impl MixedJet {
    pub fn from_jet4(j: &Jet<4>) -> Self {
        MixedJet {
            value: j.v,
            f_x: [j.g[0], j.g[1]],
            f_y: [j.g[2], j.g[3]],
            f_yy: [[j.h[2][2], j.h[2][3]], [j.h[3][2], j.h[3][3]]],
            f_xy: [[j.h[0][2], j.h[0][3]], [j.h[1][2], j.h[1][3]]],
        }
    }
}

/// A Finsler function evaluable as a second-order jet over
/// (x1, x2, y1, y2). Slots 0, 1 are the base coordinates and 2, 3 the
/// fiber coordinates.
pub trait Finsler {
    fn jet4(&self, p: &Point, y: &Direction) -> Result<Jet<4>>;

    fn value(&self, p: &Point, y: &Direction) -> Result<f64> {
        Ok(self.jet4(p, y)?.v)
    }
}

/// Adapter turning a closure over four seeded jets into a [`Finsler`].
pub struct FnFinsler<F>(pub F);

impl<F> Finsler for FnFinsler<F>
where
    F: Fn(Jet<4>, Jet<4>, Jet<4>, Jet<4>) -> Jet<4>,
{
    fn jet4(&self, p: &Point, y: &Direction) -> Result<Jet<4>> {
        if y.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        let j = (self.0)(
            Jet::var(p.x1, 0),
            Jet::var(p.x2, 1),
            Jet::var(y.y1, 2),
            Jet::var(y.y2, 3),
        );
        check_finite4(&j)
    }
}

pub(crate) fn check_finite4(j: &Jet<4>) -> Result<Jet<4>> {
    use crate::jet::Real;
    if j.is_finite() {
        Ok(*j)
    } else {
        Err(Error::NumericalBlowup)
    }
}

/// Value, gradient and Hessian of `field` at `p` via nested duals.
pub fn x_jet<F>(field: F, p: &Point) -> Result<Jet2>
where
    F: Fn(Jet<2>, Jet<2>) -> Jet<2>,
{
    use crate::jet::Real;
    let j = field(Jet::var(p.x1, 0), Jet::var(p.x2, 1));
    if !j.is_finite() {
        return Err(Error::NumericalBlowup);
    }
    Ok(Jet2 {
        value: j.v,
        grad: j.g,
        hess: j.h,
    })
}

/// All derivative blocks of a Finsler function at (p, y).
pub fn xy_jet<F: Finsler + ?Sized>(f: &F, p: &Point, y: &Direction) -> Result<MixedJet> {
    if y.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    Ok(MixedJet::from_jet4(&f.jet4(p, y)?))
}

/// Central differences with one Richardson extrapolation step; test
/// oracle for [`x_jet`].
pub fn fd_x_jet<F>(field: F, p: &Point, h: f64) -> Jet2
where
    F: Fn(f64, f64) -> f64 + Copy,
{
    let d = |h: f64| fd_x_jet_raw(field, p, h);
    richardson_jet2(d(h), d(h / 2.0))
}

fn fd_x_jet_raw<F>(field: F, p: &Point, h: f64) -> Jet2
where
    F: Fn(f64, f64) -> f64,
{
    let f = |a: f64, b: f64| field(p.x1 + a, p.x2 + b);
    let value = f(0.0, 0.0);
    let grad = [
        (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
        (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
    ];
    let hxx = (f(h, 0.0) - 2.0 * value + f(-h, 0.0)) / (h * h);
    let hyy = (f(0.0, h) - 2.0 * value + f(0.0, -h)) / (h * h);
    let hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    Jet2 {
        value,
        grad,
        hess: [[hxx, hxy], [hxy, hyy]],
    }
}

fn richardson_jet2(coarse: Jet2, fine: Jet2) -> Jet2 {
    let r = |c: f64, f: f64| (4.0 * f - c) / 3.0;
    Jet2 {
        value: fine.value,
        grad: [r(coarse.grad[0], fine.grad[0]), r(coarse.grad[1], fine.grad[1])],
        hess: [
            [
                r(coarse.hess[0][0], fine.hess[0][0]),
                r(coarse.hess[0][1], fine.hess[0][1]),
            ],
            [
                r(coarse.hess[1][0], fine.hess[1][0]),
                r(coarse.hess[1][1], fine.hess[1][1]),
            ],
        ],
    }
}

/// Finite-difference oracle for [`xy_jet`]: all blocks by central
/// differences of the plain value, Richardson extrapolated.
pub fn fd_xy_jet<F>(f: F, p: &Point, y: &Direction, h: f64) -> MixedJet
where
    F: Fn(&Point, &Direction) -> f64 + Copy,
{
    let d = |h: f64| fd_xy_jet_raw(f, p, y, h);
    let (co, fi) = (d(h), d(h / 2.0));
    let r = |c: f64, f: f64| (4.0 * f - c) / 3.0;
    let rb = |c: [[f64; 2]; 2], f: [[f64; 2]; 2]| {
        [
            [r(c[0][0], f[0][0]), r(c[0][1], f[0][1])],
            [r(c[1][0], f[1][0]), r(c[1][1], f[1][1])],
        ]
    };
    MixedJet {
        value: fi.value,
        f_x: [r(co.f_x[0], fi.f_x[0]), r(co.f_x[1], fi.f_x[1])],
        f_y: [r(co.f_y[0], fi.f_y[0]), r(co.f_y[1], fi.f_y[1])],
        f_yy: rb(co.f_yy, fi.f_yy),
        f_xy: rb(co.f_xy, fi.f_xy),
    }
}

fn fd_xy_jet_raw<F>(f: F, p: &Point, y: &Direction, h: f64) -> MixedJet
where
    F: Fn(&Point, &Direction) -> f64,
{
    let ev = |a: f64, b: f64, cy1: f64, cy2: f64| {
        f(
            &Point::new(p.x1 + a, p.x2 + b),
            &Direction::new(y.y1 + cy1, y.y2 + cy2),
        )
    };
    let value = ev(0.0, 0.0, 0.0, 0.0);
    let mut f_x = [0.0; 2];
    let mut f_y = [0.0; 2];
    for i in 0..2 {
        let (a, b) = if i == 0 { (h, 0.0) } else { (0.0, h) };
        f_x[i] = (ev(a, b, 0.0, 0.0) - ev(-a, -b, 0.0, 0.0)) / (2.0 * h);
        f_y[i] = (ev(0.0, 0.0, a, b) - ev(0.0, 0.0, -a, -b)) / (2.0 * h);
    }
    let mut f_yy = [[0.0; 2]; 2];
    let mut f_xy = [[0.0; 2]; 2];
    let e = |i: usize, s: f64| if i == 0 { (s, 0.0) } else { (0.0, s) };
    for i in 0..2 {
        for l in 0..2 {
            let (yi1, yi2) = e(i, h);
            let (yl1, yl2) = e(l, h);
            if i == l {
                f_yy[i][l] =
                    (ev(0.0, 0.0, yi1, yi2) - 2.0 * value + ev(0.0, 0.0, -yi1, -yi2)) / (h * h);
            } else {
                f_yy[i][l] = (ev(0.0, 0.0, yi1 + yl1, yi2 + yl2)
                    - ev(0.0, 0.0, yi1 - yl1, yi2 - yl2)
                    - ev(0.0, 0.0, yl1 - yi1, yl2 - yi2)
                    + ev(0.0, 0.0, -yi1 - yl1, -yi2 - yl2))
                    / (4.0 * h * h);
            }
            let (xi1, xi2) = e(i, h);
            f_xy[i][l] = (ev(xi1, xi2, yl1, yl2) - ev(xi1, xi2, -yl1, -yl2)
                - ev(-xi1, -xi2, yl1, yl2)
                + ev(-xi1, -xi2, -yl1, -yl2))
                / (4.0 * h * h);
        }
    }
    MixedJet {
        value,
        f_x,
        f_y,
        f_yy,
        f_xy,
    }
}
