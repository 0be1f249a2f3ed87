//! Checking sampled trajectories against a system.

use super::{LoadedSystem, ModelError};
use crate::autonomize::{to_autonomous, AutonomizeError, Mode};
use crate::integrate::Trajectory;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleCheck {
    pub index: usize,
    pub time: f64,
    /// Max-norm of the system residual at this sample.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub tol: f64,
    pub samples: Vec<SampleCheck>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(|s| s.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.residual))
    }
}

/// Values of one chart coordinate and its time derivative at interior samples.
struct Series {
    values: Vec<f64>,
    rates: Vec<f64>,
}

fn first_difference(times: &[f64], y: &[f64], i: usize) -> f64 {
    (y[i + 1] - y[i - 1]) / (times[i + 1] - times[i - 1])
}

fn second_difference(times: &[f64], y: &[f64], i: usize) -> f64 {
    let hm = times[i] - times[i - 1];
    let hp = times[i + 1] - times[i];
    2.0 * ((y[i + 1] - y[i]) / hp - (y[i] - y[i - 1]) / hm) / (hp + hm)
}

fn interior(n: usize) -> std::ops::Range<usize> {
    1..n - 1
}

fn series(traj: &Trajectory, name: &str) -> Result<Series, ModelError> {
    let column = if let Some(c) = traj.column(name) {
        Some(c)
    } else if name == traj.time_name {
        Some(traj.times.clone())
    } else {
        None
    };
    let t = &traj.times;
    if let Some(y) = column {
        return Ok(Series {
            values: interior(t.len()).map(|i| y[i]).collect(),
            rates: interior(t.len()).map(|i| first_difference(t, &y, i)).collect(),
        });
    }
    // a missing velocity column is the derivative of its position column
    if let Some(q) = name.strip_prefix("v_").and_then(|q| traj.column(q)) {
        return Ok(Series {
            values: interior(t.len()).map(|i| first_difference(t, &q, i)).collect(),
            rates: interior(t.len()).map(|i| second_difference(t, &q, i)).collect(),
        });
    }
    Err(ModelError::MissingColumn(name.to_string()))
}

fn validate(traj: &Trajectory) -> Result<(), ModelError> {
    if traj.len() < 3 {
        return Err(ModelError::TooFewSamples(traj.len()));
    }
    if let Some(i) = traj.times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(ModelError::NonIncreasingTimes(i + 1));
    }
    Ok(())
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Residual of the system at each interior sample, with velocities from
/// centered differences. Columns are matched to chart coordinates by name.
pub fn check_solution_samples(
    sys: &LoadedSystem,
    traj: &Trajectory,
    tol: f64,
) -> Result<CheckReport, ModelError> {
    validate(traj)?;
    let (names, residual): (Vec<String>, Box<dyn Fn(&[f64], &[f64]) -> Result<f64, ModelError>>) =
        match sys {
            LoadedSystem::Implicit(imp) => {
                let f = imp.f.clone();
                (
                    imp.chart.state_names.clone(),
                    Box::new(move |x: &[f64], _: &[f64]| {
                        let mut worst = 0.0_f64;
                        for e in &f {
                            worst = worst.max(e.eval_f64(x)?.abs());
                        }
                        Ok(worst)
                    }),
                )
            }
            other => {
                let auto = to_autonomous(other, &Mode::VectorHull).map_err(|e| match e {
                    AutonomizeError::Model(m) => m,
                    e => ModelError::Schema(e.to_string()),
                })?;
                (
                    auto.state_names().to_vec(),
                    Box::new(move |x: &[f64], xdot: &[f64]| {
                        let (a, b) = auto.evaluate_real(x)?;
                        let ax = a.mul_vec(xdot);
                        Ok(max_abs(ax.iter().zip(&b).map(|(l, r)| l - r)))
                    }),
                )
            }
        };
    let columns: Vec<Series> = names
        .iter()
        .map(|n| series(traj, n))
        .collect::<Result<_, _>>()?;
    let mut samples = Vec::with_capacity(traj.len() - 2);
    for (k, index) in interior(traj.len()).enumerate() {
        let x: Vec<f64> = columns.iter().map(|s| s.values[k]).collect();
        let xdot: Vec<f64> = columns.iter().map(|s| s.rates[k]).collect();
        let r = residual(&x, &xdot)?;
        samples.push(SampleCheck {
            index,
            time: traj.times[index],
            residual: r,
            pass: r <= tol,
        });
    }
    Ok(CheckReport { tol, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::load_system_str;

    fn trajectory(names: &[&str], times: Vec<f64>, f: impl Fn(f64) -> Vec<f64>) -> Trajectory {
        Trajectory {
            state_names: names.iter().map(|s| s.to_string()).collect(),
            time_name: "t".into(),
            clock: None,
            states: times.iter().map(|&t| f(t)).collect(),
            drift: vec![0.0; times.len()],
            times,
            projections: Vec::new(),
        }
    }

    #[test]
    fn exact_oscillator_samples_pass() {
        let sys = load_system_str(
            r#"{"kind": "linearly_singular", "states": ["q", "v"],
                "A": [["1", "0"], ["0", "1"]], "c": ["-v", "q"]}"#,
        )
        .unwrap();
        let dt = 1e-3;
        let times: Vec<f64> = (0..200).map(|k| k as f64 * dt).collect();
        let traj = trajectory(&["q", "v"], times, |t| vec![t.sin(), t.cos()]);
        let report = check_solution_samples(&sys, &traj, 1e-6).unwrap();
        assert!(report.passed());
        // centered differences are exact to O(dt²)
        assert!(report.max_residual() < dt * dt, "{}", report.max_residual());
    }

    #[test]
    fn constant_trajectory_fails_unit_rate() {
        let sys = load_system_str(
            r#"{"kind": "linearly_singular", "states": ["q"], "A": [["1"]], "c": ["-1"]}"#,
        )
        .unwrap();
        let traj = trajectory(&["q"], vec![0.0, 0.1, 0.2, 0.3], |_| vec![2.0]);
        assert!(!check_solution_samples(&sys, &traj, 1e-6).unwrap().passed());
    }

    #[test]
    fn zero_system_passes_anything() {
        let sys = load_system_str(
            r#"{"kind": "linearly_singular", "states": ["q"], "A": [], "c": []}"#,
        )
        .unwrap();
        let traj = trajectory(&["q"], vec![0.0, 0.1, 0.2], |t| vec![t * t * 17.0]);
        let report = check_solution_samples(&sys, &traj, 0.0).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn second_order_without_velocity_columns() {
        let sys = load_system_str(
            r#"{"kind": "second_order", "states": ["q"], "A": [["1"]], "c": ["q"]}"#,
        )
        .unwrap();
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 1e-2).collect();
        let traj = trajectory(&["q"], times, |t| vec![t.cos()]);
        let report = check_solution_samples(&sys, &traj, 1e-4).unwrap();
        assert!(report.passed(), "{}", report.max_residual());
    }

    #[test]
    fn implicit_residuals() {
        let sys = load_system_str(
            r#"{"kind": "implicit", "states": ["q"], "F": ["v_q^2 + q^2 - 1"]}"#,
        )
        .unwrap();
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 1e-3).collect();
        let traj = trajectory(&["q"], times, |t| vec![t.sin()]);
        assert!(check_solution_samples(&sys, &traj, 1e-6).unwrap().passed());
    }

    #[test]
    fn too_few_samples() {
        let sys = load_system_str(
            r#"{"kind": "linearly_singular", "states": ["q"], "A": [["1"]], "c": ["0"]}"#,
        )
        .unwrap();
        let traj = trajectory(&["q"], vec![0.0, 1.0], |_| vec![0.0]);
        assert!(matches!(
            check_solution_samples(&sys, &traj, 1e-6),
            Err(ModelError::TooFewSamples(2))
        ));
    }
}
