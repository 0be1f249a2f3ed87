//! Scalar expressions over a chart of named variables.
//!
//! Expressions are parsed once against a [`Scope`] (ordered variables,
//! numeric parameters and named time functions), after which every variable
//! reference is a chart index. Evaluation is generic over [`Scalar`], so the
//! same tree yields values, gradients, Hessians or nested jets.

mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::ad::{Dual, HyperDual, Scalar, Scalar2};

pub use parse::{parse_expr, ParseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Immutable expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Chart variable, by index into the scope it was parsed against.
    Var { index: usize, name: Arc<str> },
    /// Named constant; printed by name, evaluated by value.
    Param { name: Arc<str>, value: f64 },
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Power with a constant exponent.
    Pow { base: Box<Expr>, exponent: f64 },
    Func { func: Func, arg: Box<Expr> },
    /// User time function applied to an argument. `body` is an expression in
    /// a single variable (index 0).
    Call {
        name: Arc<str>,
        body: Arc<Expr>,
        arg: Box<Expr>,
    },
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("domain error in `{node}`: {reason}")]
pub struct DomainError {
    pub node: String,
    pub reason: &'static str,
}

/// Names an expression may refer to.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub variables: Vec<String>,
    pub parameters: BTreeMap<String, f64>,
    /// Time functions, each an expression in one variable.
    pub functions: BTreeMap<String, Arc<Expr>>,
    /// Variable substituted when a time function is named without an argument.
    pub time_variable: Option<String>,
}

impl Scope {
    pub fn with_variables<S: AsRef<str>>(names: &[S]) -> Self {
        Scope {
            variables: names.iter().map(|s| s.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(index: usize, name: &str) -> Expr {
        Expr::Var {
            index,
            name: Arc::from(name),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    // Builders used when constructing derived systems. They only drop
    // additive zeros and multiplicative ones/zeros.

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        Expr::Binary {
            op: BinOp::Add,
            lhs: Box::new(a),
            rhs: Box::new(b),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        Expr::Binary {
            op: BinOp::Sub,
            lhs: Box::new(a),
            rhs: Box::new(b),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::Const(0.0);
        }
        if a.as_const() == Some(1.0) {
            return b;
        }
        if b.as_const() == Some(1.0) {
            return a;
        }
        Expr::Binary {
            op: BinOp::Mul,
            lhs: Box::new(a),
            rhs: Box::new(b),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(v) if v == 0.0 => Expr::Const(0.0),
            Expr::Const(v) => Expr::Const(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    /// Indices of chart variables this expression reads.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Var { index, .. } => {
                out.insert(*index);
            }
            Expr::Const(_) | Expr::Param { .. } => {}
            Expr::Neg(a) | Expr::Pow { base: a, .. } | Expr::Func { arg: a, .. } => {
                a.collect_vars(out)
            }
            Expr::Call { arg, .. } => arg.collect_vars(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    /// Rewrites variable indices; `map` receives the old index and name.
    pub fn remap(&self, map: &dyn Fn(usize, &str) -> usize) -> Expr {
        match self {
            Expr::Var { index, name } => Expr::Var {
                index: map(*index, name),
                name: name.clone(),
            },
            Expr::Const(_) | Expr::Param { .. } => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.remap(map))),
            Expr::Pow { base, exponent } => Expr::Pow {
                base: Box::new(base.remap(map)),
                exponent: *exponent,
            },
            Expr::Func { func, arg } => Expr::Func {
                func: *func,
                arg: Box::new(arg.remap(map)),
            },
            Expr::Call { name, body, arg } => Expr::Call {
                name: name.clone(),
                body: body.clone(),
                arg: Box::new(arg.remap(map)),
            },
            Expr::Binary { op, lhs, rhs } => Expr::Binary {
                op: *op,
                lhs: Box::new(lhs.remap(map)),
                rhs: Box::new(rhs.remap(map)),
            },
        }
    }

    fn domain(&self, reason: &'static str) -> DomainError {
        DomainError {
            node: self.to_string(),
            reason,
        }
    }

    /// Evaluates over any carrier. `point` is indexed by chart position.
    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<T, DomainError> {
        let out = match self {
            Expr::Const(v) => T::from_f64(*v),
            Expr::Param { value, .. } => T::from_f64(*value),
            Expr::Var { index, .. } => point
                .get(*index)
                .cloned()
                .ok_or_else(|| self.domain("variable outside the evaluation point"))?,
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Binary { op, lhs, rhs } => {
                let l = lhs.eval(point)?;
                let r = rhs.eval(point)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r.re() == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        l / r
                    }
                }
            }
            Expr::Pow { base, exponent } => {
                let b = base.eval(point)?;
                let x = b.re();
                if x < 0.0 && exponent.fract() != 0.0 {
                    return Err(self.domain("negative base with fractional exponent"));
                }
                if x == 0.0 && *exponent < 0.0 {
                    return Err(self.domain("zero base with negative exponent"));
                }
                if *exponent == 2.0 {
                    b.clone() * b
                } else {
                    b.powf(*exponent)
                }
            }
            Expr::Func { func, arg } => {
                let a = arg.eval(point)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a.re() <= 0.0 {
                            return Err(self.domain("log of nonpositive value"));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a.re() < 0.0 {
                            return Err(self.domain("sqrt of negative value"));
                        }
                        a.sqrt()
                    }
                }
            }
            Expr::Call { body, arg, .. } => {
                let a = arg.eval(point)?;
                body.eval(std::slice::from_ref(&a))?
            }
        };
        if !out.is_finite() {
            return Err(self.domain("non-finite result"));
        }
        Ok(out)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, DomainError> {
        self.eval(point)
    }

    /// Value and gradient with respect to every chart variable.
    pub fn eval1(&self, point: &[f64]) -> Result<Dual, DomainError> {
        let n = point.len();
        let vars: Vec<Dual> = point
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::variable(v, i, n))
            .collect();
        let mut out = self.eval(&vars)?;
        out.grad.resize(n, 0.0);
        Ok(out)
    }

    /// Value, gradient and Hessian with respect to every chart variable.
    pub fn eval2(&self, point: &[f64]) -> Result<Scalar2, DomainError> {
        let vars = hyper_point(point);
        let out = self.eval(&vars)?;
        Ok(densify(out, point.len()))
    }
}

/// Seeds a point as independent hyper-dual variables.
pub fn hyper_point<T: Scalar>(point: &[T]) -> Vec<HyperDual<T>> {
    let n = point.len();
    point
        .iter()
        .enumerate()
        .map(|(i, v)| HyperDual::variable(v.clone(), i, n))
        .collect()
}

/// Expands the empty-gradient representation of constants to full size.
pub fn densify<T: Scalar>(mut h: HyperDual<T>, n: usize) -> HyperDual<T> {
    if h.grad.len() < n {
        h.grad.resize(n, T::zero());
    }
    if h.hess.len() < n * n {
        h.hess = vec![T::zero(); n * n];
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope(vars: &[&str]) -> Scope {
        Scope::with_variables(vars)
    }

    #[test]
    fn bilinear_value_gradient_hessian() {
        let e = parse_expr("q*v", &scope(&["q", "v"])).unwrap();
        let s = e.eval2(&[2.0, 3.0]).unwrap();
        assert_eq!(s.value, 6.0);
        assert_eq!(s.grad, vec![3.0, 2.0]);
        assert_eq!(s.hess, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn sine_at_zero() {
        let e = parse_expr("sin(t)", &scope(&["t"])).unwrap();
        let s = e.eval2(&[0.0]).unwrap();
        assert_eq!((s.value, s.grad[0], s.hess[0]), (0.0, 1.0, 0.0));
    }

    #[test]
    fn oscillator_lagrangian_derivatives() {
        // hand differentiation: L = v²/2 − q²/2 at (q, v) = (1, 2)
        let e = parse_expr("0.5*v^2 - 0.5*q^2", &scope(&["q", "v"])).unwrap();
        let s = e.eval2(&[1.0, 2.0]).unwrap();
        assert_eq!(s.value, 1.5);
        assert_eq!(s.grad, vec![-1.0, 2.0]);
        assert_eq!(s.hess, vec![-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn fast_paths_agree_bitwise() {
        let e = parse_expr(
            "sin(x)*exp(y)/(1 + x^2) - sqrt(y + 2)*log(x + 3) + tan(0.3*x)",
            &scope(&["x", "y"]),
        )
        .unwrap();
        let p = [0.4, -0.7];
        let v0 = e.eval_f64(&p).unwrap();
        let d1 = e.eval1(&p).unwrap();
        let d2 = e.eval2(&p).unwrap();
        assert_eq!(v0.to_bits(), d1.value.to_bits());
        assert_eq!(v0.to_bits(), d2.value.to_bits());
        for i in 0..2 {
            assert_eq!(d1.grad[i].to_bits(), d2.grad[i].to_bits());
        }
        assert_eq!(d2.hess[1], d2.hess[2]);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let e = parse_expr("1 + log(x)", &scope(&["x"])).unwrap();
        let err = e.eval_f64(&[-1.0]).unwrap_err();
        assert_eq!(err.node, "log(x)");
        let e = parse_expr("sqrt(x)", &scope(&["x"])).unwrap();
        assert!(e.eval_f64(&[-1.0]).is_err());
        let e = parse_expr("1/x", &scope(&["x"])).unwrap();
        assert!(e.eval_f64(&[0.0]).is_err());
        let e = parse_expr("x^0.5", &scope(&["x"])).unwrap();
        assert!(e.eval_f64(&[-2.0]).is_err());
    }

    #[test]
    fn builders_fold_trivial_constants() {
        let x = Expr::var(0, "x");
        assert_eq!(Expr::mul(x.clone(), Expr::Const(0.0)), Expr::Const(0.0));
        assert_eq!(Expr::add(Expr::Const(0.0), x.clone()), x);
        assert_eq!(Expr::neg(Expr::neg(x.clone())), x);
        assert_eq!(Expr::mul(Expr::Const(1.0), x.clone()), x);
    }
}
