//! Canonical parenthesized infix printing. Output re-parses to a tree with
//! identical evaluation.

use std::fmt;

use super::{BinOp, Expr};

fn number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // `{:?}` is the shortest round-trip representation
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => number(f, *v),
            Expr::Var { name, .. } | Expr::Param { name, .. } => f.write_str(name),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary { op, lhs, rhs } => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({lhs} {sym} {rhs})")
            }
            Expr::Pow { base, exponent } => write!(f, "({base}^{exponent:?})"),
            Expr::Func { func, arg } => write!(f, "{}({arg})", func.name()),
            Expr::Call { name, arg, .. } => write!(f, "{name}({arg})"),
        }
    }
}
