//! Integrate, write CSV, read it back and check the residual of the original
//! equations along the samples.

use singular_flow::autonomize::{to_autonomous, Mode};
use singular_flow::engine::{run_constraint_algorithm, EngineOptions};
use singular_flow::integrate::{integrate, IntegrateOptions, Trajectory};
use singular_flow::system::{check_solution_samples, load_system_str};

fn main() {
    let sys = load_system_str(include_str!("../specs/regular_oscillator.json")).unwrap();
    let auto = to_autonomous(&sys, &Mode::default()).unwrap();
    let result = run_constraint_algorithm(auto, &[vec![0.0, 1.0, 0.0]], &EngineOptions::default()).unwrap();
    let traj = integrate(&result, &[0.0, 1.0, 0.0], (0.0, 2.0), &IntegrateOptions::default()).unwrap();

    let mut csv = Vec::new();
    traj.write_csv(&mut csv).unwrap();
    println!("{}", String::from_utf8_lossy(&csv).lines().take(3).collect::<Vec<_>>().join("\n"));

    let back = Trajectory::read_csv(csv.as_slice(), "t").unwrap();
    let report = check_solution_samples(&sys, &back, 1e-6).unwrap();
    println!("passed {}, max residual {:.1e}", report.passed(), report.max_residual());
}
