//! Time-dependent and second-order systems as autonomous ones.
//!
//! Both constructions put time in front as state 0 and keep the original
//! state order after it, so expressions parsed over `(t, q…)` are valid
//! unchanged over the autonomous chart.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{parse_expr, Expr};
use crate::linalg::Matrix;
use crate::mechanics::{lagrangian_system, skinner_rusk_system};
use crate::system::{
    AutonomousSystem, Chart, LinSingSystem, LoadedSystem, ModelError, SecondOrderSystem,
};

#[derive(Debug, Error)]
pub enum AutonomizeError {
    #[error("system is already autonomous")]
    AlreadyAutonomous,
    #[error("implicit systems can only be checked against trajectories")]
    ImplicitUnsupported,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `Γ^i(t, q)`, one expression per state of the system it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct JetField {
    pub gamma: Vec<Expr>,
}

impl JetField {
    pub fn zero(n: usize) -> Self {
        JetField {
            gamma: vec![Expr::Const(0.0); n],
        }
    }

    /// Parses `Γ` over the chart of the system it will be applied to.
    pub fn parse(chart: &Chart, texts: &[String]) -> Result<Self, ModelError> {
        let scope = chart.scope();
        let gamma = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                parse_expr(t, &scope).map_err(|source| ModelError::Parse {
                    field: format!("jet_field[{i}]"),
                    source,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(JetField { gamma })
    }
}

/// How a time-dependent system is made autonomous.
#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    VectorHull,
    /// `None` is the zero jet field.
    JetField(Option<JetField>),
}

impl Default for Mode {
    fn default() -> Self {
        Mode::JetField(None)
    }
}

/// Homogenization of an affine map `x ↦ c + T·x` as a linear map on `(1, x)`.
pub fn vector_extension(c: &[f64], t: &Matrix<f64>) -> Matrix<f64> {
    assert_eq!(c.len(), t.nrows(), "c and T disagree on the target dimension");
    Matrix::from_fn(t.nrows() + 1, t.ncols() + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (_, 0) => c[i - 1],
        _ => *t.get(i - 1, j - 1),
    })
}

fn clock_row(n: usize) -> (Vec<Expr>, Expr) {
    let mut row = vec![Expr::Const(0.0); n];
    row[0] = Expr::Const(1.0);
    (row, Expr::Const(-1.0))
}

/// `Σ_j A^α_j Γ^j` for each row.
fn contract(a: &[Vec<Expr>], gamma: &[Expr]) -> Vec<Expr> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(gamma)
                .fold(Expr::Const(0.0), |acc, (aij, g)| {
                    Expr::add(acc, Expr::mul(aij.clone(), g.clone()))
                })
        })
        .collect()
}

fn require_time_dependent(sys: &LinSingSystem) -> Result<(), AutonomizeError> {
    if sys.time_dependent() {
        Ok(())
    } else {
        Err(AutonomizeError::AlreadyAutonomous)
    }
}

/// Vector-hull construction: `c^α·ṫ + A^α_j·q̇^j = 0` and `ṫ = 1`.
pub fn homogenize(sys: &LinSingSystem) -> Result<LinSingSystem, AutonomizeError> {
    require_time_dependent(sys)?;
    let n = sys.dim() + 1;
    let mut a = Vec::with_capacity(sys.rows() + 1);
    let mut c = Vec::with_capacity(sys.rows() + 1);
    for (row, ca) in sys.a.iter().zip(&sys.c) {
        let mut r = vec![ca.clone()];
        r.extend(row.iter().cloned());
        a.push(r);
        c.push(Expr::Const(0.0));
    }
    let (row, rhs) = clock_row(n);
    a.push(row);
    c.push(rhs);
    Ok(LinSingSystem::new(sys.chart.autonomized(), a, c)?)
}

/// Jet-field construction: `A^α_j(q̇^j − ṫ·Γ^j) = −A^α_j Γ^j − c^α` and `ṫ = 1`.
pub fn jet_field_autonomize(
    sys: &LinSingSystem,
    field: &JetField,
) -> Result<LinSingSystem, AutonomizeError> {
    require_time_dependent(sys)?;
    if field.gamma.len() != sys.dim() {
        return Err(ModelError::DimensionMismatch(format!(
            "jet field has {} components for {} states",
            field.gamma.len(),
            sys.dim()
        ))
        .into());
    }
    let n = sys.dim() + 1;
    let a_gamma = contract(&sys.a, &field.gamma);
    let mut a = Vec::with_capacity(sys.rows() + 1);
    let mut c = Vec::with_capacity(sys.rows() + 1);
    for ((row, ca), ag) in sys.a.iter().zip(&sys.c).zip(a_gamma) {
        let mut r = vec![Expr::neg(ag.clone())];
        r.extend(row.iter().cloned());
        a.push(r);
        c.push(Expr::add(ag, ca.clone()));
    }
    let (row, rhs) = clock_row(n);
    a.push(row);
    c.push(rhs);
    Ok(LinSingSystem::new(sys.chart.autonomized(), a, c)?)
}

/// First-order autonomous form of `A·q̈ + c = 0` on `(t, q, v)`: equation
/// rows, then `ṫ = 1`, then `q̇^i − v^i·ṫ = 0`.
pub fn second_order_reduce(
    sys: &SecondOrderSystem,
    mode: &Mode,
) -> Result<LinSingSystem, AutonomizeError> {
    let n = sys.dof();
    let dim = 2 * n + 1;
    let (time_col, rhs): (Vec<Expr>, Vec<Expr>) = match mode {
        Mode::VectorHull => (sys.c.clone(), vec![Expr::Const(0.0); sys.c.len()]),
        Mode::JetField(field) => {
            let gamma = match field {
                Some(f) if f.gamma.len() != n => {
                    return Err(ModelError::DimensionMismatch(format!(
                        "jet field has {} components for {n} coordinates",
                        f.gamma.len()
                    ))
                    .into())
                }
                Some(f) => f.gamma.clone(),
                None => vec![Expr::Const(0.0); n],
            };
            let ag = contract(&sys.a, &gamma);
            let time_col = ag.iter().cloned().map(Expr::neg).collect();
            let rhs = ag.into_iter().zip(&sys.c).map(|(g, c)| Expr::add(g, c.clone())).collect();
            (time_col, rhs)
        }
    };
    let mut a = Vec::with_capacity(sys.c.len() + 1 + n);
    let mut c = Vec::with_capacity(sys.c.len() + 1 + n);
    for ((row, tc), r) in sys.a.iter().zip(time_col).zip(rhs) {
        let mut full = vec![tc];
        full.extend(std::iter::repeat_n(Expr::Const(0.0), n));
        full.extend(row.iter().cloned());
        a.push(full);
        c.push(r);
    }
    let (row, r) = clock_row(dim);
    a.push(row);
    c.push(r);
    for i in 0..n {
        let mut row = vec![Expr::Const(0.0); dim];
        row[0] = Expr::neg(Expr::var(1 + n + i, &sys.chart.state_names[1 + n + i]));
        row[1 + i] = Expr::Const(1.0);
        a.push(row);
        c.push(Expr::Const(0.0));
    }
    Ok(LinSingSystem::new(sys.chart.clone(), a, c)?)
}

/// The autonomous system the constraint engine runs on, for any input kind.
/// Autonomous linearly singular systems pass through unchanged.
pub fn to_autonomous(
    sys: &LoadedSystem,
    mode: &Mode,
) -> Result<Arc<dyn AutonomousSystem>, AutonomizeError> {
    Ok(match sys {
        LoadedSystem::LinearlySingular(s) if !s.time_dependent() => Arc::new(s.clone()),
        LoadedSystem::LinearlySingular(s) => Arc::new(autonomize_first_order(s, mode)?),
        LoadedSystem::SecondOrder(s) => Arc::new(second_order_reduce(s, mode)?),
        LoadedSystem::Lagrangian(l) => Arc::new(lagrangian_system(l)),
        LoadedSystem::SkinnerRusk(l) => Arc::new(skinner_rusk_system(l)),
        LoadedSystem::Implicit(_) => return Err(AutonomizeError::ImplicitUnsupported),
    })
}

/// [`homogenize`] or [`jet_field_autonomize`] according to `mode`.
pub fn autonomize_first_order(
    sys: &LinSingSystem,
    mode: &Mode,
) -> Result<LinSingSystem, AutonomizeError> {
    match mode {
        Mode::VectorHull => homogenize(sys),
        Mode::JetField(Some(f)) => jet_field_autonomize(sys, f),
        Mode::JetField(None) => jet_field_autonomize(sys, &JetField::zero(sys.dim())),
    }
}
