//! Scalar expressions over the path parameter `s`.
//!
//! These are the closed-form handles behind [`ScalarFn::Expr`](crate::curve::ScalarFn)
//! and the expression sub-language of the tree DSL.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Byte range into the source text an expression was parsed from.
///
/// Spans are metadata: two spans always compare equal so that ASTs can be
/// compared structurally after a format/parse round trip.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    /// Tree concatenation `<<`; only meaningful at the DSL top level.
    Concat,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
            BinaryOp::Concat => "<<",
        }
    }

    /// Binding power, higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Concat => 1,
            BinaryOp::Or => 2,
            BinaryOp::And => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
            BinaryOp::Pow => 8,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

const UNARY_PRECEDENCE: u8 = 7;
const ATOM_PRECEDENCE: u8 = 9;

/// Built-in functions and their arities.
pub const FUNCTIONS: &[(&str, usize)] = &[
    ("exp", 1),
    ("ln", 1),
    ("sqrt", 1),
    ("sin", 1),
    ("cos", 1),
    ("tan", 1),
    ("abs", 1),
    ("floor", 1),
    ("rad", 1),
    ("min", 2),
    ("max", 2),
    ("impulse", 1),
];

pub fn function_arity(name: &str) -> Option<usize> {
    FUNCTIONS.iter().find(|(n, _)| *n == name).map(|(_, a)| *a)
}

/// Identifiers every expression may use.
pub const BUILTIN_NAMES: &[&str] = &["s", "ds", "pi"];

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Ident(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    /// `piecewise((cond, value), ...)`: the first arm whose condition is
    /// non-zero wins; no match is an error.
    Piecewise(Vec<(Expr, Expr)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("no piecewise arm matched")]
    NoPiecewiseMatch,
    #[error("impulse() is only defined where branch points are known")]
    ImpulseWithoutBranches,
    #[error("`<<` joins trees and cannot appear in a scalar expression")]
    ConcatInScalar,
}

/// Name lookup for expression evaluation.
pub trait Scope {
    fn lookup(&self, name: &str) -> Option<f64>;

    /// Whether the current sample is a branch point; `None` when unknown.
    fn at_branch(&self) -> Option<bool> {
        None
    }
}

/// The minimal scope: `s`, `ds`, `pi` plus a table of named values.
#[derive(Debug, Clone, Default)]
pub struct SampleScope<'a> {
    pub s: f64,
    pub ds: f64,
    pub at_branch: Option<bool>,
    pub vars: Option<&'a BTreeMap<String, f64>>,
}

impl Scope for SampleScope<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        match name {
            "s" => Some(self.s),
            "ds" => Some(self.ds),
            "pi" => Some(std::f64::consts::PI),
            _ => self.vars.and_then(|v| v.get(name).copied()),
        }
    }

    fn at_branch(&self) -> Option<bool> {
        self.at_branch
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }

    pub fn number(v: f64) -> Self {
        Self::new(ExprKind::Number(v), Span::default())
    }

    pub fn ident(name: &str) -> Self {
        Self::new(ExprKind::Ident(name.to_string()), Span::default())
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Self {
        let span = lhs.span.join(rhs.span);
        Self::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span)
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Self {
        Self::new(ExprKind::Call(name.to_string(), args), Span::default())
    }

    pub fn eval(&self, scope: &dyn Scope) -> Result<f64, EvalError> {
        let truth = |b: bool| if b { 1.0 } else { 0.0 };
        Ok(match &self.kind {
            ExprKind::Number(v) => *v,
            ExprKind::Ident(name) => scope
                .lookup(name)
                .ok_or_else(|| EvalError::UnknownIdentifier(name.clone()))?,
            ExprKind::Unary(UnaryOp::Neg, e) => -e.eval(scope)?,
            ExprKind::Binary(op, l, r) => {
                // short-circuit logic first
                match op {
                    BinaryOp::And => return Ok(truth(l.eval(scope)? != 0.0 && r.eval(scope)? != 0.0)),
                    BinaryOp::Or => return Ok(truth(l.eval(scope)? != 0.0 || r.eval(scope)? != 0.0)),
                    BinaryOp::Concat => return Err(EvalError::ConcatInScalar),
                    _ => {}
                }
                let a = l.eval(scope)?;
                let b = r.eval(scope)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a / b
                    }
                    BinaryOp::Pow => a.powf(b),
                    BinaryOp::Lt => truth(a < b),
                    BinaryOp::Le => truth(a <= b),
                    BinaryOp::Gt => truth(a > b),
                    BinaryOp::Ge => truth(a >= b),
                    BinaryOp::Eq => truth(a == b),
                    BinaryOp::Ne => truth(a != b),
                    BinaryOp::And | BinaryOp::Or | BinaryOp::Concat => unreachable!(),
                }
            }
            ExprKind::Call(name, args) => {
                let expected = function_arity(name).ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
                if args.len() != expected {
                    return Err(EvalError::Arity {
                        name: name.clone(),
                        expected,
                        got: args.len(),
                    });
                }
                if name == "impulse" {
                    return match scope.at_branch() {
                        None => Err(EvalError::ImpulseWithoutBranches),
                        Some(false) => Ok(0.0),
                        Some(true) => {
                            let ds = scope
                                .lookup("ds")
                                .ok_or_else(|| EvalError::UnknownIdentifier("ds".into()))?;
                            Ok(args[0].eval(scope)? / ds)
                        }
                    };
                }
                let x = args[0].eval(scope)?;
                match name.as_str() {
                    "exp" => x.exp(),
                    "ln" => x.ln(),
                    "sqrt" => x.sqrt(),
                    "sin" => x.sin(),
                    "cos" => x.cos(),
                    "tan" => x.tan(),
                    "abs" => x.abs(),
                    "floor" => x.floor(),
                    "rad" => x.to_radians(),
                    "min" => x.min(args[1].eval(scope)?),
                    "max" => x.max(args[1].eval(scope)?),
                    _ => return Err(EvalError::UnknownFunction(name.clone())),
                }
            }
            ExprKind::Piecewise(arms) => {
                for (cond, value) in arms {
                    if cond.eval(scope)? != 0.0 {
                        return value.eval(scope);
                    }
                }
                return Err(EvalError::NoPiecewiseMatch);
            }
        })
    }

    /// Visits every identifier occurrence (not function names).
    pub fn for_each_ident<'a>(&'a self, f: &mut dyn FnMut(&'a str, Span)) {
        match &self.kind {
            ExprKind::Number(_) => {}
            ExprKind::Ident(n) => f(n, self.span),
            ExprKind::Unary(_, e) => e.for_each_ident(f),
            ExprKind::Binary(_, l, r) => {
                l.for_each_ident(f);
                r.for_each_ident(f);
            }
            ExprKind::Call(_, args) => args.iter().for_each(|a| a.for_each_ident(f)),
            ExprKind::Piecewise(arms) => {
                for (c, v) in arms {
                    c.for_each_ident(f);
                    v.for_each_ident(f);
                }
            }
        }
    }

    pub fn idents(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.for_each_ident(&mut |n, _| out.push(n.to_string()));
        out
    }

    pub fn contains_call(&self, name: &str) -> bool {
        match &self.kind {
            ExprKind::Number(_) | ExprKind::Ident(_) => false,
            ExprKind::Unary(_, e) => e.contains_call(name),
            ExprKind::Binary(_, l, r) => l.contains_call(name) || r.contains_call(name),
            ExprKind::Call(n, args) => n == name || args.iter().any(|a| a.contains_call(name)),
            ExprKind::Piecewise(arms) => arms.iter().any(|(c, v)| c.contains_call(name) || v.contains_call(name)),
        }
    }

    /// Replaces identifiers found in `values` by numeric literals.
    pub fn substitute(&self, values: &BTreeMap<String, f64>) -> Expr {
        let kind = match &self.kind {
            ExprKind::Ident(n) => match values.get(n) {
                Some(v) => ExprKind::Number(*v),
                None => ExprKind::Ident(n.clone()),
            },
            ExprKind::Number(v) => ExprKind::Number(*v),
            ExprKind::Unary(op, e) => ExprKind::Unary(*op, Box::new(e.substitute(values))),
            ExprKind::Binary(op, l, r) => {
                ExprKind::Binary(*op, Box::new(l.substitute(values)), Box::new(r.substitute(values)))
            }
            ExprKind::Call(n, args) => ExprKind::Call(n.clone(), args.iter().map(|a| a.substitute(values)).collect()),
            ExprKind::Piecewise(arms) => ExprKind::Piecewise(
                arms.iter()
                    .map(|(c, v)| (c.substitute(values), v.substitute(values)))
                    .collect(),
            ),
        };
        Expr::new(kind, self.span)
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(op, _, _) => op.precedence(),
            ExprKind::Unary(..) => UNARY_PRECEDENCE,
            ExprKind::Number(v) if v.is_sign_negative() => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Formats a float so that it parses back to the same value.
pub fn format_number(v: f64) -> String {
    // Display for f64 is the shortest round-tripping decimal, never exponent form.
    format!("{v}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Number(v) => f.write_str(&format_number(*v)),
            ExprKind::Ident(n) => f.write_str(n),
            ExprKind::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                e.write_child(f, e.precedence() < UNARY_PRECEDENCE)
            }
            ExprKind::Binary(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = if *op == BinaryOp::Pow {
                    // right associative; a unary base needs grouping
                    (l.precedence() <= p, r.precedence() < UNARY_PRECEDENCE)
                } else if op.is_comparison() {
                    (l.precedence() <= p, r.precedence() <= p)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                l.write_child(f, lp)?;
                write!(f, " {} ", op.symbol())?;
                r.write_child(f, rp)
            }
            ExprKind::Call(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ExprKind::Piecewise(arms) => {
                f.write_str("piecewise(")?;
                for (i, (c, v)) in arms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({c}, {v})")?;
                }
                f.write_str(")")
            }
        }
    }
}
