//! L = ½(v₁ − q₂)² is singular: the algorithm finds v₁ = q₂ and leaves
//! one direction of the dynamics undetermined.

use singular_flow::autonomize::{to_autonomous, Mode};
use singular_flow::engine::{run_constraint_algorithm, EngineOptions};
use singular_flow::system::load_system_str;

const SPEC: &str = r#"{"kind": "lagrangian", "q": ["q1", "q2"], "L": "0.5*(v_q1 - q2)^2"}"#;

fn main() {
    let sys = load_system_str(SPEC).unwrap();
    let auto = to_autonomous(&sys, &Mode::default()).unwrap();
    let seeds = vec![vec![0.0, 0.3, -0.2, 0.5, 0.1]];
    let result = run_constraint_algorithm(auto, &seeds, &EngineOptions::default()).unwrap();
    println!("chart {:?}", result.state_names);
    println!(
        "status {:?}, {} constraints, gauge dimension {}",
        result.status,
        result.constraints().len(),
        result.gauge_dimension
    );

    let field = result.solution_field.as_ref().unwrap();
    let x = field.project(&seeds[0]).unwrap();
    println!("projected seed {x:?} (v_q1 − q2 = {:.1e})", x[3] - x[2]);
    let d = field.decompose(&x).unwrap();
    println!("X₀ = {:?}", d.x0);
    for (k, g) in d.gammas.iter().enumerate() {
        println!("Γ_{k} = {g:?}");
    }
    println!("{} of {} multipliers fixed by tangency", d.determined, d.multipliers.len());
}
