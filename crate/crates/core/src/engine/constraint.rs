//! Constraint functions as evaluators over jets.
//!
//! A primary constraint is `⟨s^α(x), b(x)⟩` for the α-th left-kernel vector
//! of `A(x)`. A tangency constraint built after `K` constraints is
//! `⟨σ(x), (X₀·φ_j)(x)⟩` where `σ` runs over the left kernel of the
//! tangency matrix `T_{jμ} = Γ_μ·φ_j`. Every quantity is recomputed from
//! `A` and `b` at the evaluation point, so evaluating over jets with more
//! generators differentiates straight through the eliminations.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ad::{Jet, Scalar};
use crate::expr::DomainError;
use crate::linalg::{dot, Elimination, LinalgError, Matrix, Tolerance};
use crate::system::AutonomousSystem;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("kernel dimension changed from {expected} to {found}")]
    RankDrift { expected: usize, found: usize },
}

/// Rank thresholds shared by every evaluator of one analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// For `A(x)`.
    pub matrix: Tolerance,
    /// For the tangency matrix, whose entries are derivatives and may carry
    /// rounding noise where they vanish identically.
    pub tangency: Tolerance,
}

impl Thresholds {
    pub fn new(rank_tol: f64) -> Self {
        Thresholds {
            matrix: Tolerance::relative(rank_tol),
            tangency: Tolerance {
                rel: rank_tol,
                abs: 1e-12,
            },
        }
    }
}

/// Pointwise frame of `A(x)·X = b(x)`.
#[derive(Clone, Debug)]
pub struct Frame<T> {
    /// Minimal-norm solution of the pivot rows.
    pub x0: Vec<T>,
    /// Basis of `Ker A`.
    pub gammas: Vec<Vec<T>>,
    pub b: Vec<T>,
    pub pivots: Vec<(usize, usize)>,
}

pub fn frame(
    sys: &dyn AutonomousSystem,
    x: &[Jet],
    tol: Tolerance,
) -> Result<Frame<Jet>, EvalError> {
    let (a, b) = sys.evaluate(x)?;
    frame_of(&a, b, tol)
}

pub fn frame_of<T: Scalar>(a: &Matrix<T>, b: Vec<T>, tol: Tolerance) -> Result<Frame<T>, EvalError> {
    let elim = Elimination::without_transform(a, Some(&b), tol)?;
    let gammas = elim.right_basis();
    let x0 = elim.min_norm_solution(&gammas)?;
    Ok(Frame {
        x0,
        gammas,
        pivots: elim.pivot_pattern().to_vec(),
        b,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `⟨s^row, b⟩` for the `row`-th left-kernel vector of `A`.
    Primary { row: usize },
    /// The `combo`-th left-kernel vector of the tangency matrix of the first
    /// `of` constraints, applied to their derivatives along `X₀`.
    Tangency { of: usize, combo: usize },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Primary { row } => write!(f, "primary[{row}]"),
            Provenance::Tangency { of, combo } => write!(f, "tangency[{of}:{combo}]"),
        }
    }
}

enum Node {
    Primary,
    Tangency { prior: Vec<ConstraintEvaluator> },
}

struct Inner {
    sys: Arc<dyn AutonomousSystem>,
    thresholds: Thresholds,
    /// Left-kernel dimension at the reference point.
    kernel_dim: usize,
    node: Node,
}

/// A constraint function `φ(x)` that can be evaluated, differentiated and
/// nested inside later constraints.
#[derive(Clone)]
pub struct ConstraintEvaluator {
    pub level: usize,
    pub provenance: Provenance,
    inner: Arc<Inner>,
}

impl fmt::Debug for ConstraintEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConstraintEvaluator(level {}, {})", self.level, self.provenance)
    }
}

/// `Dφ(x)[w]` where `x` and `w` use at most `k` generators.
pub fn directional(
    c: &ConstraintEvaluator,
    x: &[Jet],
    w: &[Jet],
    k: usize,
) -> Result<Jet, EvalError> {
    let lifted: Vec<Jet> = x.iter().zip(w).map(|(xi, wi)| Jet::lift(xi, wi, k)).collect();
    Ok(c.eval_jet(&lifted, k + 1)?.tangent(k))
}

/// Tangency matrix `T_{jμ} = Γ_μ·φ_j` and right-hand side `r_j = X₀·φ_j`.
pub fn tangency_system(
    constraints: &[ConstraintEvaluator],
    frame: &Frame<Jet>,
    x: &[Jet],
    k: usize,
) -> Result<(Matrix<Jet>, Vec<Jet>), EvalError> {
    let mut t = Matrix::zeros(constraints.len(), frame.gammas.len());
    let mut r = Vec::with_capacity(constraints.len());
    for (j, c) in constraints.iter().enumerate() {
        for (mu, g) in frame.gammas.iter().enumerate() {
            t.set(j, mu, directional(c, x, g, k)?);
        }
        r.push(directional(c, x, &frame.x0, k)?);
    }
    Ok((t, r))
}

/// All tangency candidates `⟨σ_c, r⟩` at a point, plus the tangency matrix rank.
pub fn tangency_candidates(
    sys: &dyn AutonomousSystem,
    constraints: &[ConstraintEvaluator],
    x: &[Jet],
    k: usize,
    thresholds: Thresholds,
) -> Result<(Vec<Jet>, usize), EvalError> {
    let fr = frame(sys, x, thresholds.matrix)?;
    let (t, r) = tangency_system(constraints, &fr, x, k)?;
    let elim = Elimination::new(&t, None, thresholds.tangency)?;
    let values = elim.left_basis().iter().map(|s| dot(s, &r)).collect();
    Ok((values, elim.rank()))
}

impl ConstraintEvaluator {
    pub(crate) fn primary(
        sys: Arc<dyn AutonomousSystem>,
        thresholds: Thresholds,
        kernel_dim: usize,
        row: usize,
    ) -> Self {
        ConstraintEvaluator {
            level: 0,
            provenance: Provenance::Primary { row },
            inner: Arc::new(Inner {
                sys,
                thresholds,
                kernel_dim,
                node: Node::Primary,
            }),
        }
    }

    pub(crate) fn tangency(
        sys: Arc<dyn AutonomousSystem>,
        thresholds: Thresholds,
        kernel_dim: usize,
        level: usize,
        prior: Vec<ConstraintEvaluator>,
        combo: usize,
    ) -> Self {
        ConstraintEvaluator {
            level,
            provenance: Provenance::Tangency {
                of: prior.len(),
                combo,
            },
            inner: Arc::new(Inner {
                sys,
                thresholds,
                kernel_dim,
                node: Node::Tangency { prior },
            }),
        }
    }

    fn check_dim(&self, found: usize) -> Result<(), EvalError> {
        if found == self.inner.kernel_dim {
            Ok(())
        } else {
            Err(EvalError::RankDrift {
                expected: self.inner.kernel_dim,
                found,
            })
        }
    }

    /// Evaluates at a jet point using `k` generators.
    pub fn eval_jet(&self, x: &[Jet], k: usize) -> Result<Jet, EvalError> {
        let inner = &self.inner;
        match (&inner.node, &self.provenance) {
            (Node::Primary, Provenance::Primary { row }) => {
                let (a, b) = inner.sys.evaluate(x)?;
                let elim = Elimination::new(&a, None, inner.thresholds.matrix)?;
                let left = elim.left_basis();
                self.check_dim(left.len())?;
                Ok(dot(&left[*row], &b))
            }
            (Node::Tangency { prior }, Provenance::Tangency { combo, .. }) => {
                let fr = frame(inner.sys.as_ref(), x, inner.thresholds.matrix)?;
                let (t, r) = tangency_system(prior, &fr, x, k)?;
                let elim = Elimination::new(&t, None, inner.thresholds.tangency)?;
                let left = elim.left_basis();
                self.check_dim(left.len())?;
                Ok(dot(&left[*combo], &r))
            }
            _ => unreachable!("node and provenance are built together"),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        let jets: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        Ok(self.eval_jet(&jets, 0)?.value())
    }

    /// Value and gradient.
    pub fn value_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), EvalError> {
        let jets: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        let zero = Jet::constant(0.0);
        let mut grad = Vec::with_capacity(x.len());
        let mut value = None;
        for i in 0..x.len() {
            let mut e = vec![zero.clone(); x.len()];
            e[i] = Jet::constant(1.0);
            let lifted: Vec<Jet> = jets.iter().zip(&e).map(|(xi, wi)| Jet::lift(xi, wi, 0)).collect();
            let y = self.eval_jet(&lifted, 1)?;
            value.get_or_insert(y.value());
            grad.push(y.tangent(0).value());
        }
        let value = match value {
            Some(v) => v,
            None => self.value(x)?,
        };
        Ok((value, grad))
    }

    /// Derivative along `w` at a real point.
    pub fn derivative_along(&self, x: &[f64], w: &[f64]) -> Result<f64, EvalError> {
        let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        let wj: Vec<Jet> = w.iter().map(|&v| Jet::constant(v)).collect();
        Ok(directional(self, &xj, &wj, 0)?.value())
    }
}
