//! Scalar expressions over `x1..xn` for boundary data and implicit domains.
//!
//! Expressions are parsed once and evaluated generically, so the same tree yields
//! values, gradients, and Hessians through nested dual numbers.

mod dual;
mod parse;

pub use dual::{Dual, Real};

use std::fmt;

use crate::symmat::SymMatrix;

/// Width of the band around a kink of `abs`, `min`, or `max` where derivatives are refused.
pub const KINK_TOLERANCE: f64 = 1e-12;

/// Source location; `line` and `col` are 1-based, `start..end` are byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    fn join(&self, other: &Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
            line: self.line,
            col: self.col,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { msg: String, line: usize, col: usize },

    #[error("unknown identifier '{name}' at line {line}, column {col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },

    #[error("'{name}' takes {expected} argument(s), found {found} (line {line}, column {col})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },

    #[error("domain error at line {line}, column {col}: {msg}")]
    Domain { msg: String, line: usize, col: usize },

    #[error("'{func}' is not differentiable here (line {line}, column {col})")]
    NonSmooth { func: String, line: usize, col: usize },

    #[error("variable x{index} used but the point has dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("'{func}' is not allowed in a smooth expression (line {line}, column {col})")]
    NotSmooth { func: String, line: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
    Atan,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            "atan" => Func::Atan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Atan => "atan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    /// `abs`, `min` and `max` have kinks.
    pub fn is_smooth(self) -> bool {
        !matches!(self, Func::Abs | Func::Min | Func::Max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Pi,
    /// Zero-based variable index: `x1` is `Var(0)`.
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Vec<Expr>),
}

/// Expression tree; equality compares structure and ignores source spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SymMatrix,
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    parse::parse(src)
}

impl std::str::FromStr for Expr {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Expr {
    fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        let span = lhs.span.join(&rhs.span);
        Expr {
            kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
            span,
        }
    }

    /// Number of coordinates the expression needs: one more than the largest variable index.
    pub fn arity(&self) -> usize {
        let mut m = 0;
        self.visit(&mut |e| {
            if let ExprKind::Var(k) = e.kind {
                m = m.max(k + 1);
            }
        });
        m
    }

    /// Rejects `abs`, `min`, `max`, which would break C² regularity.
    pub fn require_smooth(&self) -> Result<(), ExprError> {
        let mut bad = None;
        self.visit(&mut |e| {
            if let ExprKind::Call(f, _) = &e.kind {
                if !f.is_smooth() && bad.is_none() {
                    bad = Some(ExprError::NotSmooth {
                        func: f.name().into(),
                        line: e.span.line,
                        col: e.span.col,
                    });
                }
            }
        });
        bad.map_or(Ok(()), Err)
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Neg(a) | ExprKind::Pow(a, _) => a.visit(f),
            ExprKind::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            ExprKind::Num(_) | ExprKind::Pi | ExprKind::Var(_) => {}
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ExprError> {
        self.eval_real(x)
    }

    /// Evaluates over any [`Real`]; derivative-carrying types refuse kinks.
    pub fn eval_real<T: Real>(&self, x: &[T]) -> Result<T, ExprError> {
        let domain = |msg: &str| ExprError::Domain {
            msg: msg.into(),
            line: self.span.line,
            col: self.span.col,
        };
        let kink = |f: Func| ExprError::NonSmooth {
            func: f.name().into(),
            line: self.span.line,
            col: self.span.col,
        };
        Ok(match &self.kind {
            ExprKind::Num(v) => T::cst(*v),
            ExprKind::Pi => T::cst(std::f64::consts::PI),
            ExprKind::Var(k) => *x.get(*k).ok_or(ExprError::VariableOutOfRange {
                index: k + 1,
                dim: x.len(),
            })?,
            ExprKind::Neg(a) => -a.eval_real(x)?,
            ExprKind::Bin(op, a, b) => {
                let (u, v) = (a.eval_real(x)?, b.eval_real(x)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => {
                        if v.value() == 0.0 {
                            return Err(domain("division by zero"));
                        }
                        u / v
                    }
                }
            }
            ExprKind::Pow(a, k) => {
                let u = a.eval_real(x)?;
                if *k < 0 && u.value() == 0.0 {
                    return Err(domain("negative power of zero"));
                }
                u.powi(*k)
            }
            ExprKind::Call(f, args) => {
                let u = args[0].eval_real(x)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Atan => u.atan(),
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Log => {
                        if u.value() <= 0.0 {
                            return Err(domain("log of a nonpositive number"));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u.value() < 0.0 {
                            return Err(domain("sqrt of a negative number"));
                        }
                        if T::DIFFERENTIATES && u.value() == 0.0 {
                            return Err(kink(*f));
                        }
                        u.sqrt()
                    }
                    Func::Abs => {
                        if T::DIFFERENTIATES && u.value().abs() <= KINK_TOLERANCE {
                            return Err(kink(*f));
                        }
                        if u.value() < 0.0 {
                            -u
                        } else {
                            u
                        }
                    }
                    Func::Min | Func::Max => {
                        let v = args[1].eval_real(x)?;
                        if T::DIFFERENTIATES && (u.value() - v.value()).abs() <= KINK_TOLERANCE {
                            return Err(kink(*f));
                        }
                        let first = (u.value() <= v.value()) == (*f == Func::Min);
                        if first {
                            u
                        } else {
                            v
                        }
                    }
                }
            }
        })
    }

    /// Value, gradient, and Hessian by nested forward-mode duals.
    ///
    /// One evaluation per unordered coordinate pair; the gradient comes from the diagonal runs.
    pub fn eval_with_derivatives(&self, x: &[f64]) -> Result<Derivatives, ExprError> {
        let n = x.len();
        let arity = self.arity();
        if arity > n {
            return Err(ExprError::VariableOutOfRange {
                index: arity,
                dim: n,
            });
        }
        let mut gradient = vec![0.0; n];
        let mut hessian = SymMatrix::zeros(n);
        let mut value = self.eval(x)?;
        let mut point: Vec<Dual<Dual<f64>>> = x
            .iter()
            .map(|&v| Dual::new(Dual::new(v, 0.0), Dual::new(0.0, 0.0)))
            .collect();
        for i in 0..n {
            for j in i..n {
                point[i].re.eps = 1.0;
                point[j].eps.re = 1.0;
                let r = self.eval_real(&point)?;
                if i == j {
                    gradient[i] = r.re.eps;
                    value = r.re.re;
                }
                hessian.set(i, j, r.eps.eps);
                point[i].re.eps = 0.0;
                point[j].eps.re = 0.0;
            }
        }
        Ok(Derivatives {
            value,
            gradient,
            hessian,
        })
    }
}

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Bin(op, ..) => op.precedence(),
        ExprKind::Neg(_) => 3,
        ExprKind::Pow(..) => 4,
        ExprKind::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Pi => f.write_str("pi"),
            ExprKind::Var(k) => write!(f, "x{}", k + 1),
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                write_wrapped(f, a, precedence(a) < 3)
            }
            ExprKind::Bin(op, a, b) => {
                let p = op.precedence();
                write_wrapped(f, a, precedence(a) < p)?;
                write!(f, " {} ", op.symbol())?;
                write_wrapped(f, b, precedence(b) <= p)
            }
            ExprKind::Pow(a, k) => {
                write_wrapped(f, a, precedence(a) < 5)?;
                write!(f, "^{k}")
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
