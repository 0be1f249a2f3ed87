//! Systems in coordinates.
//!
//! A time-dependent linearly singular system reads `A(t,q)·q̇ + c(t,q) = 0`.
//! An autonomous one reads `A(x)·ẋ = b(x)`; it is stored with the same
//! `(A, c)` pair and `b = −c`, so there is exactly one sign convention in
//! memory and in spec documents.

mod check;
mod document;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ad::{Jet, Scalar};
use crate::expr::{DomainError, Expr, ParseError, Scope};
use crate::linalg::Matrix;
use crate::mechanics::{LagrangianSpec, SkinnerRuskSpec};

pub use check::{check_solution_samples, CheckReport, SampleCheck};
pub use document::{load_system, load_system_str, to_document, SpecDocument, SystemKind};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("in `{field}`: {source}")]
    Parse {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("too few samples: {0} (at least 3 needed)")]
    TooFewSamples(usize),
    #[error("trajectory times must be strictly increasing (sample {0})")]
    NonIncreasingTimes(usize),
    #[error("trajectory is missing column `{0}`")]
    MissingColumn(String),
}

/// A named function of time, given as an expression in the time variable.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFunction {
    pub name: String,
    pub body: Arc<Expr>,
}

/// Variable names and named constants of a system.
///
/// For time-dependent charts the evaluation variables are
/// `(time_variable, states…)`; for autonomous charts they are the states,
/// and a state named `time_variable`, if present, is the clock.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub time_variable: String,
    pub time_dependent: bool,
    pub state_names: Vec<String>,
    pub parameters: BTreeMap<String, f64>,
    pub time_functions: BTreeMap<String, TimeFunction>,
}

impl Chart {
    pub fn new(time_variable: &str, time_dependent: bool, state_names: Vec<String>) -> Self {
        Chart {
            time_variable: time_variable.to_string(),
            time_dependent,
            state_names,
            parameters: BTreeMap::new(),
            time_functions: BTreeMap::new(),
        }
    }

    /// Evaluation variables in order.
    pub fn variables(&self) -> Vec<String> {
        let mut v = Vec::with_capacity(self.state_names.len() + 1);
        if self.time_dependent {
            v.push(self.time_variable.clone());
        }
        v.extend(self.state_names.iter().cloned());
        v
    }

    /// Index of the time coordinate among [`Chart::variables`].
    pub fn time_index(&self) -> Option<usize> {
        if self.time_dependent {
            Some(0)
        } else {
            self.state_names.iter().position(|s| *s == self.time_variable)
        }
    }

    pub fn scope(&self) -> Scope {
        Scope {
            variables: self.variables(),
            parameters: self.parameters.clone(),
            functions: self
                .time_functions
                .iter()
                .map(|(k, f)| (k.clone(), f.body.clone()))
                .collect(),
            time_variable: Some(self.time_variable.clone()),
        }
    }

    /// The same names and constants as an autonomous chart over `(t, states…)`.
    pub fn autonomized(&self) -> Chart {
        let mut states = vec![self.time_variable.clone()];
        states.extend(self.state_names.iter().cloned());
        Chart {
            time_dependent: false,
            state_names: states,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::BTreeSet::new();
        let vars = self.variables();
        let names = vars
            .iter()
            .chain(self.parameters.keys())
            .chain(self.time_functions.keys());
        for name in names {
            if crate::expr::Func::from_name(name).is_some() {
                return Err(ModelError::Schema(format!(
                    "`{name}` is a built-in function name"
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(ModelError::Schema(format!("name `{name}` is declared twice")));
            }
        }
        Ok(())
    }
}

/// `A(t,q)·q̇ + c(t,q) = 0`, or `A(x)·ẋ = −c(x)` when autonomous.
#[derive(Clone, Debug, PartialEq)]
pub struct LinSingSystem {
    pub chart: Chart,
    pub a: Vec<Vec<Expr>>,
    pub c: Vec<Expr>,
}

impl LinSingSystem {
    pub fn new(chart: Chart, a: Vec<Vec<Expr>>, c: Vec<Expr>) -> Result<Self, ModelError> {
        let n = chart.state_names.len();
        if a.len() != c.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "A has {} rows but c has {} entries",
                a.len(),
                c.len()
            )));
        }
        if let Some(i) = a.iter().position(|row| row.len() != n) {
            return Err(ModelError::DimensionMismatch(format!(
                "A row {i} has {} entries for {n} states",
                a[i].len()
            )));
        }
        Ok(LinSingSystem { chart, a, c })
    }

    pub fn time_dependent(&self) -> bool {
        self.chart.time_dependent
    }

    pub fn rows(&self) -> usize {
        self.c.len()
    }

    pub fn dim(&self) -> usize {
        self.chart.state_names.len()
    }

    /// `b = −c`.
    pub fn b(&self) -> Vec<Expr> {
        self.c.iter().cloned().map(Expr::neg).collect()
    }

    /// `A(point)·velocity + c(point)`; `point` holds the chart variables.
    pub fn residual(&self, point: &[f64], velocity: &[f64]) -> Result<Vec<f64>, ModelError> {
        if velocity.len() != self.dim() || point.len() != self.chart.variables().len() {
            return Err(ModelError::DimensionMismatch(format!(
                "point has {} and velocity {} entries; chart has {} variables and {} states",
                point.len(),
                velocity.len(),
                self.chart.variables().len(),
                self.dim()
            )));
        }
        let mut out = Vec::with_capacity(self.rows());
        for (row, c) in self.a.iter().zip(&self.c) {
            let mut acc = c.eval_f64(point)?;
            for (e, v) in row.iter().zip(velocity) {
                if !e.is_zero() {
                    acc += e.eval_f64(point)? * v;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// `A(t,q,v)·q̈ + c(t,q,v) = 0` over the chart `(t, q…, v…)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderSystem {
    /// Autonomous chart with states `(t, q…, v…)`.
    pub chart: Chart,
    pub q_names: Vec<String>,
    pub a: Vec<Vec<Expr>>,
    pub c: Vec<Expr>,
}

impl SecondOrderSystem {
    pub fn dof(&self) -> usize {
        self.q_names.len()
    }
}

/// `F(t, q, v) = 0`, usable only for checking candidate solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitResiduals {
    /// Autonomous chart with states `(t, q…, v…)`.
    pub chart: Chart,
    pub q_names: Vec<String>,
    pub f: Vec<Expr>,
}

/// Name of the velocity paired with a position.
pub fn velocity_name(q: &str) -> String {
    format!("v_{q}")
}

/// The chart `(t, q…, v…)` used by second-order, implicit and Lagrangian inputs.
pub fn jet_chart(time_variable: &str, q_names: &[String]) -> Chart {
    let mut states = vec![time_variable.to_string()];
    states.extend(q_names.iter().cloned());
    states.extend(q_names.iter().map(|q| velocity_name(q)));
    Chart::new(time_variable, false, states)
}

/// Any system a spec document can describe.
#[derive(Clone, Debug)]
pub enum LoadedSystem {
    LinearlySingular(LinSingSystem),
    SecondOrder(SecondOrderSystem),
    Lagrangian(LagrangianSpec),
    SkinnerRusk(SkinnerRuskSpec),
    Implicit(ImplicitResiduals),
}

impl LoadedSystem {
    pub fn kind(&self) -> SystemKind {
        match self {
            LoadedSystem::LinearlySingular(_) => SystemKind::LinearlySingular,
            LoadedSystem::SecondOrder(_) => SystemKind::SecondOrder,
            LoadedSystem::Lagrangian(_) => SystemKind::Lagrangian,
            LoadedSystem::SkinnerRusk(_) => SystemKind::SkinnerRusk,
            LoadedSystem::Implicit(_) => SystemKind::Implicit,
        }
    }
}

/// An autonomous linearly singular system `A(x)·ẋ = b(x)` as seen by the
/// constraint engine. Implementations evaluate over jets so that constraint
/// functions built from `A` and `b` can be differentiated to any order.
pub trait AutonomousSystem: Send + Sync + fmt::Debug {
    fn state_names(&self) -> &[String];

    fn row_count(&self) -> usize;

    /// State that advances with unit rate (the time coordinate), if any.
    fn clock(&self) -> Option<usize>;

    /// `(A(x), b(x))`.
    fn evaluate(&self, x: &[Jet]) -> Result<(Matrix<Jet>, Vec<Jet>), DomainError>;

    fn dim(&self) -> usize {
        self.state_names().len()
    }

    fn evaluate_real(&self, x: &[f64]) -> Result<(Matrix<f64>, Vec<f64>), DomainError> {
        let jets: Vec<Jet> = x.iter().map(|&v| Jet::constant(v)).collect();
        let (a, b) = self.evaluate(&jets)?;
        Ok((a.re(), b.iter().map(Scalar::re).collect()))
    }
}

fn eval_entry<T: Scalar>(e: &Expr, x: &[T]) -> Result<T, DomainError> {
    match e {
        Expr::Const(v) => Ok(T::from_f64(*v)),
        _ => e.eval(x),
    }
}

impl LinSingSystem {
    /// `(A(x), b(x))` over any carrier; `x` holds the chart variables.
    pub fn evaluate_generic<T: Scalar>(&self, x: &[T]) -> Result<(Matrix<T>, Vec<T>), DomainError> {
        let n = self.dim();
        let mut a = Matrix::zeros(self.rows(), n);
        let mut b = Vec::with_capacity(self.rows());
        for (i, (row, c)) in self.a.iter().zip(&self.c).enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    a.set(i, j, eval_entry(e, x)?);
                }
            }
            b.push(-eval_entry(c, x)?);
        }
        Ok((a, b))
    }
}

impl AutonomousSystem for LinSingSystem {
    fn state_names(&self) -> &[String] {
        &self.chart.state_names
    }

    fn row_count(&self) -> usize {
        self.rows()
    }

    fn clock(&self) -> Option<usize> {
        if self.chart.time_dependent {
            None
        } else {
            self.chart.time_index()
        }
    }

    fn evaluate(&self, x: &[Jet]) -> Result<(Matrix<Jet>, Vec<Jet>), DomainError> {
        self.evaluate_generic(x)
    }

    fn evaluate_real(&self, x: &[f64]) -> Result<(Matrix<f64>, Vec<f64>), DomainError> {
        self.evaluate_generic(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const PENDULUM: &str = r#"{
        "kind": "linearly_singular",
        "time_variable": "t",
        "states": ["x", "y", "vx", "vy", "tau"],
        "parameters": {"g": 9.8},
        "time_functions": {"R": "1"},
        "A": [["1","0","0","0","0"],
              ["0","1","0","0","0"],
              ["0","0","1","0","0"],
              ["0","0","0","1","0"],
              ["0","0","0","0","0"]],
        "c": ["-vx", "-vy", "tau*x", "tau*y + g", "-(x^2 + y^2 - R^2)"]
    }"#;

    fn pendulum() -> LinSingSystem {
        match load_system_str(PENDULUM).unwrap() {
            LoadedSystem::LinearlySingular(s) => s,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pendulum_loads_with_five_rows_and_states() {
        let sys = pendulum();
        assert_eq!(sys.rows(), 5);
        assert_eq!(sys.dim(), 5);
        assert!(sys.time_dependent());
    }

    #[test]
    fn pendulum_residual_at_rest() {
        let sys = pendulum();
        let r = sys
            .residual(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], &[0.0; 5])
            .unwrap();
        assert_eq!(r, vec![0.0, 0.0, 0.0, 9.8, 0.0]);
    }

    #[test]
    fn zero_and_identity_residuals() {
        let chart = Chart::new("t", true, vec!["a".into(), "b".into()]);
        let zero = LinSingSystem::new(
            chart.clone(),
            vec![vec![Expr::Const(0.0); 2]; 2],
            vec![Expr::Const(0.0); 2],
        )
        .unwrap();
        assert_eq!(zero.residual(&[0.3, 1.0, 2.0], &[5.0, -7.0]).unwrap(), vec![0.0, 0.0]);

        let v0 = [1.5, -2.5];
        let ident = LinSingSystem::new(
            chart,
            vec![
                vec![Expr::Const(1.0), Expr::Const(0.0)],
                vec![Expr::Const(0.0), Expr::Const(1.0)],
            ],
            v0.iter().map(|v| Expr::Const(-v)).collect(),
        )
        .unwrap();
        assert_eq!(ident.residual(&[0.0, 9.0, 9.0], &v0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let mut chart = Chart::new("t", true, vec!["x".into(), "x".into()]);
        assert!(chart.validate().is_err());
        chart.state_names = vec!["t".into()];
        assert!(chart.validate().is_err());
    }
}
