//! JSON spec documents.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    jet_chart, Chart, ImplicitResiduals, LinSingSystem, LoadedSystem, ModelError,
    SecondOrderSystem, TimeFunction,
};
use crate::expr::{parse_expr, Expr, Scope};
use crate::mechanics::{LagrangianSpec, SkinnerRuskSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    LinearlySingular,
    SecondOrder,
    Lagrangian,
    SkinnerRusk,
    Implicit,
}

fn default_time() -> String {
    "t".to_string()
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// On-disk form of a system. Expressions are strings in the expression grammar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub kind: SystemKind,
    #[serde(default = "default_time")]
    pub time_variable: String,
    /// Linearly singular only: `A·ẋ = −c` over the states, no separate time.
    #[serde(default, skip_serializing_if = "is_false")]
    pub autonomous: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub time_functions: BTreeMap<String, String>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<String>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<String>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<String>>,
    /// Seed points in the chart the constraint algorithm runs on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<Vec<f64>>>,
    /// Jet field `Γ` (one expression per state) for the jet-field construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jet_field: Option<Vec<String>>,
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec documents always serialize")
    }
}

fn required<'a, T>(field: &'a Option<T>, name: &str, kind: SystemKind) -> Result<&'a T, ModelError> {
    field
        .as_ref()
        .ok_or_else(|| ModelError::Schema(format!("kind {kind:?} requires key `{name}`")))
}

fn parse_at(text: &str, scope: &Scope, field: String) -> Result<Expr, ModelError> {
    parse_expr(text, scope).map_err(|source| ModelError::Parse { field, source })
}

fn parse_vec(texts: &[String], scope: &Scope, field: &str) -> Result<Vec<Expr>, ModelError> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| parse_at(t, scope, format!("{field}[{i}]")))
        .collect()
}

fn parse_matrix(rows: &[Vec<String>], scope: &Scope, field: &str) -> Result<Vec<Vec<Expr>>, ModelError> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, t)| parse_at(t, scope, format!("{field}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

/// Fills parameters and time functions into `chart`.
fn declare_constants(doc: &SpecDocument, chart: &mut Chart) -> Result<(), ModelError> {
    chart.parameters = doc.parameters.clone();
    let scope = Scope {
        variables: vec![doc.time_variable.clone()],
        parameters: doc.parameters.clone(),
        functions: BTreeMap::new(),
        time_variable: None,
    };
    for (name, text) in &doc.time_functions {
        let body = parse_at(text, &scope, format!("time_functions.{name}"))?;
        chart.time_functions.insert(
            name.clone(),
            TimeFunction {
                name: name.clone(),
                body: Arc::new(body),
            },
        );
    }
    chart.validate()
}

fn check_square(a: &[Vec<Expr>], c: &[Expr], n: usize) -> Result<(), ModelError> {
    if a.len() != c.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "A has {} rows but c has {} entries",
            a.len(),
            c.len()
        )));
    }
    if let Some(i) = a.iter().position(|row| row.len() != n) {
        return Err(ModelError::DimensionMismatch(format!(
            "A row {i} has {} entries, expected {n}",
            a[i].len()
        )));
    }
    Ok(())
}

/// Parses and dimension-checks a spec document.
pub fn load_system(doc: &SpecDocument) -> Result<LoadedSystem, ModelError> {
    let kind = doc.kind;
    if doc.autonomous && kind != SystemKind::LinearlySingular {
        return Err(ModelError::Schema(
            "`autonomous` applies only to linearly_singular systems".into(),
        ));
    }
    match kind {
        SystemKind::LinearlySingular => {
            let mut chart = Chart::new(&doc.time_variable, !doc.autonomous, doc.states.clone());
            declare_constants(doc, &mut chart)?;
            let scope = chart.scope();
            let a = parse_matrix(required(&doc.a, "A", kind)?, &scope, "A")?;
            let c = parse_vec(required(&doc.c, "c", kind)?, &scope, "c")?;
            check_square(&a, &c, chart.state_names.len())?;
            Ok(LoadedSystem::LinearlySingular(LinSingSystem::new(chart, a, c)?))
        }
        SystemKind::SecondOrder => {
            let q_names = doc.states.clone();
            let mut chart = jet_chart(&doc.time_variable, &q_names);
            declare_constants(doc, &mut chart)?;
            let scope = chart.scope();
            let a = parse_matrix(required(&doc.a, "A", kind)?, &scope, "A")?;
            let c = parse_vec(required(&doc.c, "c", kind)?, &scope, "c")?;
            check_square(&a, &c, q_names.len())?;
            Ok(LoadedSystem::SecondOrder(SecondOrderSystem {
                chart,
                q_names,
                a,
                c,
            }))
        }
        SystemKind::Implicit => {
            let q_names = doc.states.clone();
            let mut chart = jet_chart(&doc.time_variable, &q_names);
            declare_constants(doc, &mut chart)?;
            let f = parse_vec(required(&doc.f, "F", kind)?, &chart.scope(), "F")?;
            Ok(LoadedSystem::Implicit(ImplicitResiduals { chart, q_names, f }))
        }
        SystemKind::Lagrangian | SystemKind::SkinnerRusk => {
            let q_names = required(&doc.q, "q", kind)?.clone();
            if q_names.is_empty() {
                return Err(ModelError::Schema("`q` must name at least one coordinate".into()));
            }
            let mut chart = jet_chart(&doc.time_variable, &q_names);
            declare_constants(doc, &mut chart)?;
            let l = parse_at(required(&doc.l, "L", kind)?, &chart.scope(), "L".into())?;
            let spec = LagrangianSpec { chart, q_names, l };
            Ok(if kind == SystemKind::Lagrangian {
                LoadedSystem::Lagrangian(spec)
            } else {
                LoadedSystem::SkinnerRusk(SkinnerRuskSpec(spec))
            })
        }
    }
}

pub fn load_system_str(text: &str) -> Result<LoadedSystem, ModelError> {
    load_system(&SpecDocument::from_json(text)?)
}

fn print_vec(v: &[Expr]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn print_matrix(a: &[Vec<Expr>]) -> Vec<Vec<String>> {
    a.iter().map(|row| print_vec(row)).collect()
}

fn base_document(kind: SystemKind, chart: &Chart) -> SpecDocument {
    SpecDocument {
        kind,
        time_variable: chart.time_variable.clone(),
        autonomous: false,
        states: Vec::new(),
        parameters: chart.parameters.clone(),
        time_functions: chart
            .time_functions
            .iter()
            .map(|(k, f)| (k.clone(), f.body.to_string()))
            .collect(),
        a: None,
        c: None,
        q: None,
        l: None,
        f: None,
        seeds: None,
        jet_field: None,
    }
}

/// Serializes a system back to a spec document, printing every expression.
pub fn to_document(sys: &LoadedSystem) -> SpecDocument {
    match sys {
        LoadedSystem::LinearlySingular(s) => {
            let mut doc = base_document(SystemKind::LinearlySingular, &s.chart);
            doc.autonomous = !s.chart.time_dependent;
            doc.states = s.chart.state_names.clone();
            doc.a = Some(print_matrix(&s.a));
            doc.c = Some(print_vec(&s.c));
            doc
        }
        LoadedSystem::SecondOrder(s) => {
            let mut doc = base_document(SystemKind::SecondOrder, &s.chart);
            doc.states = s.q_names.clone();
            doc.a = Some(print_matrix(&s.a));
            doc.c = Some(print_vec(&s.c));
            doc
        }
        LoadedSystem::Implicit(s) => {
            let mut doc = base_document(SystemKind::Implicit, &s.chart);
            doc.states = s.q_names.clone();
            doc.f = Some(print_vec(&s.f));
            doc
        }
        LoadedSystem::Lagrangian(s) | LoadedSystem::SkinnerRusk(SkinnerRuskSpec(s)) => {
            let mut doc = base_document(sys.kind(), &s.chart);
            doc.q = Some(s.q_names.clone());
            doc.l = Some(s.l.to_string());
            doc
        }
    }
}
