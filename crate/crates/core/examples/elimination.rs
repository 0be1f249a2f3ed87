//! Rank, both kernels and minimal-norm solutions of a dense system.

use singular_flow::linalg::{rank_nullspaces, solve_consistent, Matrix, SolveResult};

fn main() {
    let a = Matrix::from_rows(vec![
        vec![1.0, 2.0, 3.0],
        vec![2.0, 4.0, 6.0],
        vec![1.0, 0.0, 1.0],
    ])
    .unwrap();
    let ns = rank_nullspaces(&a, 1e-12).unwrap();
    println!("rank {}, pivots {:?}", ns.rank, ns.pivot_pattern);
    println!("Ker A  = {:?}", ns.right_basis);
    println!("Ker Aᵀ = {:?}", ns.left_basis);

    for b in [[1.0, 2.0, 0.0], [1.0, 0.0, 0.0]] {
        match solve_consistent(&a, &b, 1e-12).unwrap() {
            SolveResult::Consistent { particular, nullspace } => {
                println!("b = {b:?}: x = {particular:?} + span of {} vector(s)", nullspace.len())
            }
            SolveResult::Inconsistent { violated_rows, residuals } => {
                println!("b = {b:?}: inconsistent in rows {violated_rows:?}, residuals {residuals:?}")
            }
        }
    }
}
