//! Hand-derived oracles and small numeric helpers shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use singular_flow::autonomize::{to_autonomous, Mode};
use singular_flow::engine::{run_constraint_algorithm, AnalysisResult, EngineOptions};
use singular_flow::system::{load_system_str, AutonomousSystem, LoadedSystem};

pub const G: f64 = 9.8;
pub const PENDULUM: &str = include_str!("../../specs/pendulum.json");

/// Constant-length pendulum, `R ≡ 1`.
pub const RIGID_PENDULUM: &str = r#"{
  "kind": "linearly_singular",
  "states": ["x", "y", "vx", "vy", "tau"],
  "parameters": {"g": 9.8},
  "A": [["1", "0", "0", "0", "0"], ["0", "1", "0", "0", "0"], ["0", "0", "1", "0", "0"],
        ["0", "0", "0", "1", "0"], ["0", "0", "0", "0", "0"]],
  "c": ["-vx", "-vy", "tau*x", "tau*y + g", "-(x^2 + y^2 - 1)"]
}"#;

pub fn auto(doc: &str, mode: &Mode) -> (LoadedSystem, Arc<dyn AutonomousSystem>) {
    let sys = load_system_str(doc).expect("spec loads");
    let a = to_autonomous(&sys, mode).expect("autonomizes");
    (sys, a)
}

pub fn analyze(doc: &str, seeds: &[Vec<f64>]) -> AnalysisResult {
    let (_, a) = auto(doc, &Mode::default());
    run_constraint_algorithm(a, seeds, &EngineOptions::default()).expect("analysis runs")
}

/// `R(t)` and its first two derivatives for the variable-length pendulum.
pub fn radius(t: f64) -> (f64, f64, f64) {
    (1.0 + 0.1 * t.sin(), 0.1 * t.cos(), -0.1 * t.sin())
}

// Pendulum chart: (t, x, y, vx, vy, tau).

pub fn phi1(s: &[f64]) -> f64 {
    let (r, _, _) = radius(s[0]);
    s[1] * s[1] + s[2] * s[2] - r * r
}

pub fn phi2(s: &[f64]) -> f64 {
    let (r, r1, _) = radius(s[0]);
    s[1] * s[3] + s[2] * s[4] - r * r1
}

/// Derivative of `phi2` along ẋ = vx, ẏ = vy, v̇x = −τx, v̇y = −τy − g, ṫ = 1.
pub fn phi3(s: &[f64]) -> f64 {
    let (r, r1, r2) = radius(s[0]);
    let (x, y, vx, vy, tau) = (s[1], s[2], s[3], s[4], s[5]);
    vx * vx + vy * vy - tau * (x * x + y * y) - G * y - r1 * r1 - r * r2
}

/// A point on the final pendulum manifold from polar data.
pub fn pendulum_point(t: f64, angle: f64, v_angle: f64) -> Vec<f64> {
    let (r, r1, r2) = radius(t);
    let (c, s) = (angle.cos(), angle.sin());
    let (x, y) = (r * c, r * s);
    let vx = r1 * c - r * s * v_angle;
    let vy = r1 * s + r * c * v_angle;
    let tau = (vx * vx + vy * vy - G * y - r1 * r1 - r * r2) / (r * r);
    vec![t, x, y, vx, vy, tau]
}

/// Velocity of the polar field `∂t + v_φ ∂φ − ((2R′v_φ + g cos φ)/R) ∂v_φ`
/// pushed to (t, x, y, vx, vy).
pub fn polar_field(s: &[f64]) -> [f64; 5] {
    let (r, r1, r2) = radius(s[0]);
    let angle = s[2].atan2(s[1]);
    let v_angle = (s[1] * s[4] - s[2] * s[3]) / (r * r);
    let (c, sn) = (angle.cos(), angle.sin());
    let acc = -(2.0 * r1 * v_angle + G * c) / r;
    [
        1.0,
        s[3],
        s[4],
        r2 * c - 2.0 * r1 * sn * v_angle - r * c * v_angle * v_angle - r * sn * acc,
        r2 * sn + 2.0 * r1 * c * v_angle - r * sn * v_angle * v_angle + r * c * acc,
    ]
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn central_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[i] += h;
            m[i] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}

/// Dense Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Minimal-norm Newton projection onto the common zero set of `fs`, with
/// finite-difference Jacobians and coordinate `fixed` held constant.
pub fn newton_project(fs: &[&dyn Fn(&[f64]) -> f64], x0: &[f64], fixed: usize) -> Vec<f64> {
    let mut x = x0.to_vec();
    for _ in 0..100 {
        let phi: Vec<f64> = fs.iter().map(|f| f(&x)).collect();
        if max_abs(phi.iter().copied()) < 1e-14 {
            break;
        }
        let jac: Vec<Vec<f64>> = fs
            .iter()
            .map(|f| {
                let mut g = central_gradient(*f, &x, 1e-6);
                g[fixed] = 0.0;
                g
            })
            .collect();
        let jjt: Vec<Vec<f64>> = jac
            .iter()
            .map(|ri| jac.iter().map(|rj| ri.iter().zip(rj).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let y = solve(jjt, phi);
        for (j, xj) in x.iter_mut().enumerate() {
            *xj -= jac.iter().zip(&y).map(|(r, yi)| r[j] * yi).sum::<f64>();
        }
    }
    x
}
