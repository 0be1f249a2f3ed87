//! A regular Lagrangian needs no constraints; its flow is the usual one.

use singular_flow::autonomize::{to_autonomous, Mode};
use singular_flow::engine::{run_constraint_algorithm, EngineOptions};
use singular_flow::integrate::{integrate, IntegrateOptions};
use singular_flow::system::load_system_str;

fn main() {
    let sys = load_system_str(include_str!("../specs/regular_oscillator.json")).unwrap();
    let auto = to_autonomous(&sys, &Mode::default()).unwrap();
    let result = run_constraint_algorithm(auto, &[vec![0.0, 1.0, 0.0]], &EngineOptions::default()).unwrap();
    println!("status {:?}, {} constraint levels", result.status, result.levels.len());

    let period = 2.0 * std::f64::consts::PI;
    let traj = integrate(&result, &[0.0, 1.0, 0.0], (0.0, period), &IntegrateOptions::default()).unwrap();
    let q = traj.column("q").unwrap();
    let err = traj
        .times
        .iter()
        .zip(&q)
        .map(|(t, q)| (q - t.cos()).abs())
        .fold(0.0_f64, f64::max);
    println!("max |q − cos t| over one period: {err:.1e}");
}
