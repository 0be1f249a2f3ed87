//! Affine maps x ↦ c + T·x become linear maps on (1, x), and composition
//! is preserved.

use singular_flow::autonomize::vector_extension;
use singular_flow::linalg::Matrix;

fn main() {
    let t1 = Matrix::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
    let c1 = [1.0, 2.0];
    let t2 = Matrix::from_rows(vec![vec![2.0, 0.0], vec![0.5, 1.0]]).unwrap();
    let c2 = [-3.0, 0.25];

    // (f₂ ∘ f₁)(x) = c₂ + T₂c₁ + T₂T₁x
    let t = t2.mul(&t1);
    let c: Vec<f64> = t2.mul_vec(&c1).iter().zip(&c2).map(|(a, b)| a + b).collect();

    let lhs = vector_extension(&c, &t);
    let rhs = vector_extension(&c2, &t2).mul(&vector_extension(&c1, &t1));
    for i in 0..3 {
        println!("{:?}   {:?}", lhs.row(i), rhs.row(i));
    }
}
