//! Gradients, Hessians and nested directional derivatives of parsed expressions.

use singular_flow::ad::{Jet, Scalar};
use singular_flow::expr::{parse_expr, Scope};

fn main() {
    let scope = Scope::with_variables(&["x", "y"]);
    let e = parse_expr("sin(x*y) + x^3/y", &scope).unwrap();
    let p = [0.7, 1.3];
    println!("f = {e}");

    let d = e.eval1(&p).unwrap();
    println!("f(p) = {}, ∇f = {:?}", d.re(), d.grad);

    let h = e.eval2(&p).unwrap();
    for i in 0..2 {
        println!("H[{i}] = [{}, {}]", h.hess_entry(i, 0), h.hess_entry(i, 1));
    }

    // D²f(p)[u, w] from two lifts
    let (u, w) = ([1.0, 0.0], [0.0, 1.0]);
    let once: Vec<Jet> = (0..2).map(|i| Jet::lift(&Jet::constant(p[i]), &Jet::constant(u[i]), 0)).collect();
    let twice: Vec<Jet> = (0..2).map(|i| Jet::lift(&once[i], &Jet::constant(w[i]), 1)).collect();
    let f = e.eval(&twice).unwrap();
    println!("∂²f/∂x∂y from jets = {}", f.coefficient(0b11));
}
