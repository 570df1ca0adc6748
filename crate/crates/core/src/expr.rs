//! Analytic scalar fields on the plane as shared expression trees.
//!
//! An `Expr` evaluates generically over any [`Real`], so the same tree
//! yields plain values, x-jets (`Jet<2>`) or mixed (x, y)-jets (`Jet<4>`
//! with the x slots seeded). The grammar accepted by [`Expr::parse`] is
//! the one the CLI config uses: `+ - * / ^`, `exp ln sin cos sqrt pow`,
//! variables `x1`, `x2` and numeric constants.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Real;
use crate::quad::simpson;

#[derive(Debug)]
enum Node {
    Const(f64),
    X1,
    X2,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powc(Expr, f64),
    Exp(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
    Sqrt(Expr),
    /// The scale factor c(B) of the quartic-ODE local structure,
    /// applied to a B-valued subexpression. The value is computed by
    /// quadrature; first and second derivatives come from the closed-form
    /// logarithmic derivative of c.
    CofB { k1: f64, k2: f64, k3: f64, arg: Expr },
}

#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn new(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn constant(v: f64) -> Self {
        Expr::new(Node::Const(v))
    }
    pub fn x1() -> Self {
        Expr::new(Node::X1)
    }
    pub fn x2() -> Self {
        Expr::new(Node::X2)
    }
    pub fn powc(&self, e: f64) -> Self {
        Expr::new(Node::Powc(self.clone(), e))
    }
    pub fn exp(&self) -> Self {
        Expr::new(Node::Exp(self.clone()))
    }
    pub fn ln(&self) -> Self {
        Expr::new(Node::Ln(self.clone()))
    }
    pub fn sin(&self) -> Self {
        Expr::new(Node::Sin(self.clone()))
    }
    pub fn cos(&self) -> Self {
        Expr::new(Node::Cos(self.clone()))
    }
    pub fn sqrt(&self) -> Self {
        Expr::new(Node::Sqrt(self.clone()))
    }
    pub fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// `c(B)` applied to this expression, see (the quartic-ODE structure).
    pub fn c_of_b(&self, k1: f64, k2: f64, k3: f64) -> Self {
        Expr::new(Node::CofB {
            k1,
            k2,
            k3,
            arg: self.clone(),
        })
    }

    pub fn eval<R: Real>(&self, x1: R, x2: R) -> R {
        match &*self.0 {
            Node::Const(v) => R::from_f64(*v),
            Node::X1 => x1,
            Node::X2 => x2,
            Node::Add(a, b) => a.eval(x1, x2) + b.eval(x1, x2),
            Node::Sub(a, b) => a.eval(x1, x2) - b.eval(x1, x2),
            Node::Mul(a, b) => a.eval(x1, x2) * b.eval(x1, x2),
            Node::Div(a, b) => a.eval(x1, x2) / b.eval(x1, x2),
            Node::Neg(a) => -a.eval(x1, x2),
            Node::Powc(a, e) => {
                if *e == e.round() && e.abs() < 64.0 {
                    a.eval(x1, x2).powi(*e as i32)
                } else {
                    a.eval(x1, x2).powf(*e)
                }
            }
            Node::Exp(a) => a.eval(x1, x2).exp(),
            Node::Ln(a) => a.eval(x1, x2).ln(),
            Node::Sin(a) => a.eval(x1, x2).sin(),
            Node::Cos(a) => a.eval(x1, x2).cos(),
            Node::Sqrt(a) => a.eval(x1, x2).sqrt(),
            Node::CofB { k1, k2, k3, arg } => {
                let b = arg.eval(x1, x2);
                let (c0, c1, c2) = c_of_b_derivs(*k1, *k2, *k3, b.value());
                b.compose(c0, c1, c2)
            }
        }
    }

    pub fn eval_f64(&self, x1: f64, x2: f64) -> f64 {
        self.eval(x1, x2)
    }

    /// Parse the CLI expression grammar.
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Config(format!(
                "unexpected trailing input in expression at byte {}: {:?}",
                p.pos, src
            )));
        }
        Ok(e)
    }
}

/// Value, first and second derivative of `c(B) = exp(int_0^B psi(t) dt)`
/// with `psi(t) = (k3 + k2 t) / (2 (1 + (k1+k3) t + k2 t^2))`.
pub fn c_of_b_derivs(k1: f64, k2: f64, k3: f64, b: f64) -> (f64, f64, f64) {
    let psi = |t: f64| 0.5 * (k3 + k2 * t) / (1.0 + (k1 + k3) * t + k2 * t * t);
    let c0 = simpson(&psi, 0.0, b, 1e-12).exp();
    let d = 1.0 + (k1 + k3) * b + k2 * b * b;
    let dp = (k1 + k3) + 2.0 * k2 * b;
    let p = psi(b);
    let pp = 0.5 * (k2 * d - (k3 + k2 * b) * dp) / (d * d);
    (c0, c0 * p, c0 * (p * p + pp))
}

macro_rules! expr_binop {
    ($trait:ident, $method:ident, $node:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, o: Expr) -> Expr {
                Expr::new(Node::$node(self, o))
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, o: f64) -> Expr {
                Expr::new(Node::$node(self, Expr::constant(o)))
            }
        }
        impl std::ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, o: Expr) -> Expr {
                Expr::new(Node::$node(Expr::constant(self), o))
            }
        }
    };
}

expr_binop!(Add, add, Add);
expr_binop!(Sub, sub, Sub);
expr_binop!(Mul, mul, Mul);
expr_binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::new(Node::Neg(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::X1 => write!(f, "x1"),
            Node::X2 => write!(f, "x2"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Powc(a, e) => write!(f, "pow({a}, {e})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::CofB { arg, .. } => write!(f, "c_of_b({arg})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "expected '{}' at byte {} of expression",
                b as char, self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs + self.term()?;
            } else if self.eat(b'-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs * self.factor()?;
            } else if self.eat(b'/') {
                lhs = lhs / self.factor()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let e = self.factor()?;
            return Ok(pow_expr(base, e));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::Config(format!(
                "unexpected token {:?} at byte {} of expression",
                other.map(|b| b as char),
                self.pos
            ))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos > start
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|&n| n.is_ascii_digit() || n == b'+' || n == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::constant)
            .map_err(|_| Error::Config(format!("bad numeric literal {text:?}")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "x1" => Ok(Expr::x1()),
            "x2" => Ok(Expr::x2()),
            "pi" => Ok(Expr::constant(std::f64::consts::PI)),
            "exp" | "ln" | "sin" | "cos" | "sqrt" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b')')?;
                Ok(match name {
                    "exp" => a.exp(),
                    "ln" => a.ln(),
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    _ => a.sqrt(),
                })
            }
            "pow" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(pow_expr(a, b))
            }
            _ => Err(Error::Config(format!("unknown identifier {name:?}"))),
        }
    }
}

fn pow_expr(base: Expr, e: Expr) -> Expr {
    if let Node::Const(v) = &*e.0 {
        base.powc(*v)
    } else {
        (e * base.ln()).exp()
    }
}
