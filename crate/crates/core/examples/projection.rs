//! Pull an arbitrary point onto the pendulum's constraint manifold, holding
//! time fixed.

use singular_flow::autonomize::{to_autonomous, Mode};
use singular_flow::engine::{run_constraint_algorithm, EngineOptions};
use singular_flow::system::load_system_str;

fn main() {
    let sys = load_system_str(include_str!("../specs/pendulum.json")).unwrap();
    let auto = to_autonomous(&sys, &Mode::default()).unwrap();
    let seeds = vec![vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]];
    let result = run_constraint_algorithm(auto, &seeds, &EngineOptions::default()).unwrap();
    let field = result.solution_field.as_ref().unwrap();

    let raw = [0.5, 0.8, -0.9, 0.3, -0.2, 4.0];
    let on = field.project(&raw).unwrap();
    println!("before {raw:?}, drift {:.1e}", field.drift(&raw).unwrap());
    println!("after  {on:.6?}, drift {:.1e}", field.drift(&on).unwrap());
    println!("velocity {:.6?}", field.velocity(&on).unwrap());
}
