//! 0·ẋ = 1 has no solutions; the algorithm stops at the first level.

use singular_flow::autonomize::{to_autonomous, Mode};
use singular_flow::engine::{run_constraint_algorithm, EngineOptions};
use singular_flow::system::load_system_str;

fn main() {
    let sys = load_system_str(include_str!("../specs/inconsistent.json")).unwrap();
    let auto = to_autonomous(&sys, &Mode::default()).unwrap();
    let result = run_constraint_algorithm(auto, &[vec![0.0]], &EngineOptions::default()).unwrap();
    println!("status {:?}", result.status);
    for w in &result.warnings {
        println!("warning: {w}");
    }
}
