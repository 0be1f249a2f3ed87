//! Fixed-step RK4 on the solution field with periodic projection.

use std::io::{Read, Write};

use thiserror::Error;

use crate::engine::{AnalysisResult, EvalError, ProjectionError, SolutionField};
use crate::system::ModelError;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("analysis did not end in a solved state")]
    NotSolved,
    #[error("initial point is off the final constraint manifold (max |φ| = {residual:e})")]
    OffManifold { residual: f64 },
    #[error("field evaluation failed at t = {time}: {source}")]
    StepRejected {
        time: f64,
        #[source]
        source: EvalError,
    },
    #[error("clock advances at rate {rate} at t = {time}")]
    ClockRate { time: f64, rate: f64 },
    #[error("invalid integration parameters: {0}")]
    InvalidParameters(String),
    #[error("projection failed at t = {time}: {source}")]
    Projection {
        time: f64,
        #[source]
        source: ProjectionError,
    },
    #[error("initial point has {found} coordinates, system has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Time-stamped states with per-sample constraint drift.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub state_names: Vec<String>,
    pub time_name: String,
    /// Index of the state that is the time coordinate, if any.
    pub clock: Option<usize>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `max |φ|` over the final constraints, measured before any projection.
    pub drift: Vec<f64>,
    /// Sample indices at which the state was projected.
    pub projections: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().fold(0.0_f64, |m, d| m.max(*d))
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.state_names.iter().position(|n| n == name)?;
        Some(self.states.iter().map(|s| s[i]).collect())
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(Vec::as_slice)
    }

    /// Header: time column (only when no state is the clock), states, `drift`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = Vec::new();
        if self.clock.is_none() {
            header.push(&self.time_name);
        }
        header.extend(self.state_names.iter().map(String::as_str));
        header.push("drift");
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row: Vec<String> = Vec::with_capacity(header.len());
            if self.clock.is_none() {
                row.push(self.times[k].to_string());
            }
            row.extend(self.states[k].iter().map(f64::to_string));
            row.push(self.drift.get(k).copied().unwrap_or(0.0).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a trajectory table; the time column is the one named `time_name`.
    /// A `drift` column is optional.
    pub fn read_csv<R: Read>(input: R, time_name: &str) -> Result<Trajectory, IntegrateError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let time_col = header
            .iter()
            .position(|h| h == time_name)
            .ok_or_else(|| ModelError::MissingColumn(time_name.to_string()))?;
        let drift_col = header.iter().position(|h| h == "drift");
        let state_cols: Vec<usize> = (0..header.len()).filter(|&i| Some(i) != drift_col).collect();
        let mut traj = Trajectory {
            state_names: state_cols.iter().map(|&i| header[i].clone()).collect(),
            time_name: time_name.to_string(),
            clock: state_cols.iter().position(|&i| i == time_col),
            times: Vec::new(),
            states: Vec::new(),
            drift: Vec::new(),
            projections: Vec::new(),
        };
        for record in r.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64, IntegrateError> {
                let field = record.get(i).unwrap_or("").trim();
                field.parse().map_err(|_| {
                    ModelError::Schema(format!("`{field}` in column `{}` is not a number", header[i]))
                        .into()
                })
            };
            traj.times.push(parse(time_col)?);
            traj.states
                .push(state_cols.iter().map(|&i| parse(i)).collect::<Result<_, _>>()?);
            traj.drift.push(match drift_col {
                Some(i) => parse(i)?,
                None => 0.0,
            });
        }
        Ok(traj)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    /// Project after this many steps; 0 never projects.
    pub project_every: usize,
    /// Largest `max |φ(x0)|` accepted before the start point is projected.
    pub start_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            dt: 1e-3,
            project_every: 10,
            start_tol: 1e-6,
        }
    }
}

const CLOCK_RATE_TOL: f64 = 1e-12;

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Integrates the solution field of a solved analysis from `x0` over `t_span`.
///
/// For systems with a clock state, that state is set to `t_span.0` at the start.
pub fn integrate(
    result: &AnalysisResult,
    x0: &[f64],
    t_span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Trajectory, IntegrateError> {
    let field = result.solution_field.as_ref().ok_or(IntegrateError::NotSolved)?;
    integrate_field(field, x0, t_span, opts)
}

pub fn integrate_field(
    field: &SolutionField,
    x0: &[f64],
    (t0, t1): (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Trajectory, IntegrateError> {
    let sys = field.system();
    if x0.len() != sys.dim() {
        return Err(IntegrateError::Dimension {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    if !(opts.dt > 0.0) || !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrateError::InvalidParameters(format!(
            "need dt > 0 and t1 > t0, got dt = {}, span ({t0}, {t1})",
            opts.dt
        )));
    }
    let steps = ((t1 - t0) / opts.dt).round().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let clock = sys.clock();

    let mut x = x0.to_vec();
    if let Some(c) = clock {
        x[c] = t0;
    }
    let reject = |time: f64| move |source: EvalError| IntegrateError::StepRejected { time, source };
    let start_drift = field.drift(&x).map_err(reject(t0))?;
    if start_drift > opts.start_tol {
        return Err(IntegrateError::OffManifold {
            residual: start_drift,
        });
    }
    if !field.constraints().is_empty() {
        x = field
            .project(&x)
            .map_err(|source| IntegrateError::Projection { time: t0, source })?;
    }

    let mut traj = Trajectory {
        state_names: sys.state_names().to_vec(),
        time_name: time_name(sys.state_names(), clock),
        clock,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        drift: Vec::with_capacity(steps + 1),
        projections: Vec::new(),
    };
    traj.times.push(t0);
    traj.drift.push(field.drift(&x).map_err(reject(t0))?);
    traj.states.push(x.clone());

    let rate = |t: f64, k: &[f64]| -> Result<(), IntegrateError> {
        if let Some(c) = clock {
            if (k[c] - 1.0).abs() > CLOCK_RATE_TOL {
                return Err(IntegrateError::ClockRate { time: t, rate: k[c] });
            }
        }
        Ok(())
    };
    for step in 0..steps {
        let t = t0 + step as f64 * h;
        let eval = |y: &[f64], ts: f64| -> Result<Vec<f64>, IntegrateError> {
            let k = field.velocity(y).map_err(reject(ts))?;
            rate(ts, &k)?;
            Ok(k)
        };
        let k1 = eval(&x, t)?;
        let k2 = eval(&axpy(&x, h / 2.0, &k1), t + h / 2.0)?;
        let k3 = eval(&axpy(&x, h / 2.0, &k2), t + h / 2.0)?;
        let k4 = eval(&axpy(&x, h, &k3), t + h)?;
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if step + 1 == steps { t1 } else { t0 + (step + 1) as f64 * h };
        if let Some(c) = clock {
            x[c] = t_next;
        }
        let drift = field.drift(&x).map_err(reject(t_next))?;
        if opts.project_every > 0
            && (step + 1) % opts.project_every == 0
            && !field.constraints().is_empty()
        {
            x = field
                .project(&x)
                .map_err(|source| IntegrateError::Projection { time: t_next, source })?;
            traj.projections.push(step + 1);
        }
        traj.times.push(match clock {
            Some(c) => x[c],
            None => t_next,
        });
        traj.drift.push(drift);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

fn time_name(names: &[String], clock: Option<usize>) -> String {
    match clock {
        Some(c) => names[c].clone(),
        None => "time".to_string(),
    }
}
