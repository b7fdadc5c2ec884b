//! A small scalar expression AST used to describe connection coefficients.
//!
//! Expressions are built once per model, differentiated symbolically, and then
//! evaluated either on plain points (f64) or on jets, which yields exact
//! higher derivatives wherever the expansion machinery needs them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::jet::{Jet, JetCtx};
use crate::Result;

#[derive(Debug, Clone)]
pub enum ExprNode {
    Const(f64),
    /// The i-th ambient coordinate.
    Coord(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Neg(Expr),
    Sqrt(Expr),
    Recip(Expr),
    Sin(Expr),
    Cos(Expr),
}

/// Reference-counted expression handle; cloning is cheap and subtrees are
/// shared freely.
#[derive(Debug, Clone)]
pub struct Expr(Arc<ExprNode>);

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr(Arc::new(ExprNode::Const(c)))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn coord(i: usize) -> Expr {
        Expr(Arc::new(ExprNode::Coord(i)))
    }

    fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            ExprNode::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.as_const(), Some(c) if c == 0.0)
    }

    pub fn sqrt(&self) -> Expr {
        if let Some(c) = self.as_const() {
            if c >= 0.0 {
                return Expr::constant(c.sqrt());
            }
        }
        Expr(Arc::new(ExprNode::Sqrt(self.clone())))
    }

    pub fn sin(&self) -> Expr {
        if let Some(c) = self.as_const() {
            return Expr::constant(c.sin());
        }
        Expr(Arc::new(ExprNode::Sin(self.clone())))
    }

    pub fn cos(&self) -> Expr {
        if let Some(c) = self.as_const() {
            return Expr::constant(c.cos());
        }
        Expr(Arc::new(ExprNode::Cos(self.clone())))
    }

    pub fn recip(&self) -> Expr {
        if let Some(c) = self.as_const() {
            if c != 0.0 {
                return Expr::constant(1.0 / c);
            }
        }
        Expr(Arc::new(ExprNode::Recip(self.clone())))
    }

    /// Monomial Π zᵢ^{eᵢ}.
    pub fn monomial(exponent: &[usize]) -> Expr {
        let mut acc = Expr::one();
        for (i, &k) in exponent.iter().enumerate() {
            for _ in 0..k {
                acc = acc * Expr::coord(i);
            }
        }
        acc
    }

    /// Symbolic partial derivative with respect to coordinate i.
    pub fn diff(&self, i: usize) -> Expr {
        match &*self.0 {
            ExprNode::Const(_) => Expr::zero(),
            ExprNode::Coord(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            ExprNode::Add(a, b) => a.diff(i) + b.diff(i),
            ExprNode::Sub(a, b) => a.diff(i) - b.diff(i),
            ExprNode::Mul(a, b) => a.diff(i) * b.clone() + a.clone() * b.diff(i),
            ExprNode::Neg(a) => -a.diff(i),
            // (√a)′ = a′/(2√a)
            ExprNode::Sqrt(a) => {
                a.diff(i) * Expr::constant(0.5) * self.clone().recip()
            }
            // (1/a)′ = −a′/a²
            ExprNode::Recip(a) => -(a.diff(i) * self.clone() * self.clone()),
            ExprNode::Sin(a) => a.diff(i) * a.cos(),
            ExprNode::Cos(a) => -(a.diff(i) * a.sin()),
        }
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(match &*self.0 {
            ExprNode::Const(c) => *c,
            ExprNode::Coord(i) => point[*i],
            ExprNode::Add(a, b) => a.eval(point)? + b.eval(point)?,
            ExprNode::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            ExprNode::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            ExprNode::Neg(a) => -a.eval(point)?,
            ExprNode::Sqrt(a) => {
                let v = a.eval(point)?;
                if v < 0.0 {
                    return Err(crate::Error::Domain(format!(
                        "square root of negative value {v} in expression"
                    )));
                }
                v.sqrt()
            }
            ExprNode::Recip(a) => {
                let v = a.eval(point)?;
                if v == 0.0 {
                    return Err(crate::Error::Domain(
                        "reciprocal of zero in expression".into(),
                    ));
                }
                1.0 / v
            }
            ExprNode::Sin(a) => a.eval(point)?.sin(),
            ExprNode::Cos(a) => a.eval(point)?.cos(),
        })
    }

    /// Evaluate on the jet algebra centered at `point`; coordinate i becomes
    /// the jet pointᵢ + (zᵢ − pointᵢ).
    pub fn eval_jet(&self, ctx: &JetCtx, point: &[f64]) -> Result<Jet> {
        Ok(match &*self.0 {
            ExprNode::Const(c) => Jet::constant(ctx, *c),
            ExprNode::Coord(i) => Jet::variable(ctx, *i, point[*i]),
            ExprNode::Add(a, b) => a.eval_jet(ctx, point)?.add(&b.eval_jet(ctx, point)?),
            ExprNode::Sub(a, b) => a.eval_jet(ctx, point)?.sub(&b.eval_jet(ctx, point)?),
            ExprNode::Mul(a, b) => a.eval_jet(ctx, point)?.mul(&b.eval_jet(ctx, point)?),
            ExprNode::Neg(a) => a.eval_jet(ctx, point)?.neg(),
            ExprNode::Sqrt(a) => a.eval_jet(ctx, point)?.sqrt()?,
            ExprNode::Recip(a) => a.eval_jet(ctx, point)?.recip()?,
            ExprNode::Sin(a) => a.eval_jet(ctx, point)?.sin(),
            ExprNode::Cos(a) => a.eval_jet(ctx, point)?.cos(),
        })
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::constant(a + b);
        }
        Expr(Arc::new(ExprNode::Add(self, rhs)))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return -rhs;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::constant(a - b);
        }
        Expr(Arc::new(ExprNode::Sub(self, rhs)))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if let Some(a) = self.as_const() {
            if a == 1.0 {
                return rhs;
            }
        }
        if let Some(b) = rhs.as_const() {
            if b == 1.0 {
                return self;
            }
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::constant(a * b);
        }
        Expr(Arc::new(ExprNode::Mul(self, rhs)))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        if let Some(c) = self.as_const() {
            return Expr::constant(-c);
        }
        Expr(Arc::new(ExprNode::Neg(self)))
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        self * Expr::constant(rhs)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            ExprNode::Const(c) => write!(f, "{c}"),
            ExprNode::Coord(i) => write!(f, "z{i}"),
            ExprNode::Add(a, b) => write!(f, "({a} + {b})"),
            ExprNode::Sub(a, b) => write!(f, "({a} - {b})"),
            ExprNode::Mul(a, b) => write!(f, "({a}*{b})"),
            ExprNode::Neg(a) => write!(f, "(-{a})"),
            ExprNode::Sqrt(a) => write!(f, "sqrt({a})"),
            ExprNode::Recip(a) => write!(f, "1/({a})"),
            ExprNode::Sin(a) => write!(f, "sin({a})"),
            ExprNode::Cos(a) => write!(f, "cos({a})"),
        }
    }
}
