//! Lagrangian and Skinner–Rusk frontends.
//!
//! Both build an autonomous linearly singular system whose matrix entries
//! come from derivatives of `L`, computed per point by evaluating `L` over
//! hyper-duals whose base carrier is the engine's jet type. That keeps the
//! entries differentiable to any depth.

use crate::ad::{HyperDual, Jet, Scalar};
use crate::expr::{densify, hyper_point, DomainError, Expr};
use crate::linalg::Matrix;
use crate::system::{velocity_name, AutonomousSystem, Chart};

/// `L(t, q, v)` over the chart `(t, q…, v_q…)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSpec {
    pub chart: Chart,
    pub q_names: Vec<String>,
    pub l: Expr,
}

impl LagrangianSpec {
    pub fn dof(&self) -> usize {
        self.q_names.len()
    }

    /// Value, gradient and Hessian of `L` at `(t, q, v)`.
    fn derivatives<T: Scalar>(&self, tqv: &[T]) -> Result<HyperDual<T>, DomainError> {
        let out = self.l.eval(&hyper_point(tqv))?;
        Ok(densify(out, tqv.len()))
    }
}

/// Same data, analyzed on the mixed chart `(t, q, p_t, p, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkinnerRuskSpec(pub LagrangianSpec);

/// `i_X Ω_L = 0`, `ṫ = 1`, `q̇ − v·ṫ = 0` on `(t, q, v)`.
#[derive(Clone, Debug)]
pub struct LagrangianSystem {
    spec: LagrangianSpec,
}

pub fn lagrangian_system(spec: &LagrangianSpec) -> LagrangianSystem {
    LagrangianSystem { spec: spec.clone() }
}

impl LagrangianSystem {
    pub fn spec(&self) -> &LagrangianSpec {
        &self.spec
    }

    /// `Ω_L = −dp∧dq + dE∧dt` with `p = ∂L/∂v`, `E = p·v − L`, as a
    /// `(2n+1)²` matrix `Ω(∂_a, ∂_b)`.
    pub fn omega<T: Scalar>(&self, x: &[T]) -> Result<Matrix<T>, DomainError> {
        let n = self.spec.dof();
        let dim = 2 * n + 1;
        let l = self.spec.derivatives(x)?;
        let v_idx = |i: usize| 1 + n + i;
        // ∇p_i[a] = ∂²L/∂v_i∂x_a
        let grad_p = |i: usize, a: usize| l.hess_entry(v_idx(i), a);
        let grad_e: Vec<T> = (0..dim)
            .map(|a| {
                let mut acc = -l.grad[a].clone();
                for i in 0..n {
                    acc = acc + grad_p(i, a) * x[v_idx(i)].clone();
                    if a == v_idx(i) {
                        acc = acc + l.grad[v_idx(i)].clone();
                    }
                }
                acc
            })
            .collect();
        let mut omega = Matrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut w = T::zero();
                for i in 0..n {
                    let q = 1 + i;
                    if b == q {
                        w = w - grad_p(i, a);
                    }
                    if a == q {
                        w = w + grad_p(i, b);
                    }
                }
                if b == 0 {
                    w = w + grad_e[a].clone();
                }
                if a == 0 {
                    w = w - grad_e[b].clone();
                }
                omega.set(a, b, w);
            }
        }
        Ok(omega)
    }
}

impl AutonomousSystem for LagrangianSystem {
    fn state_names(&self) -> &[String] {
        &self.spec.chart.state_names
    }

    fn row_count(&self) -> usize {
        let n = self.spec.dof();
        2 * n + 1 + 1 + n
    }

    fn clock(&self) -> Option<usize> {
        Some(0)
    }

    fn evaluate(&self, x: &[Jet]) -> Result<(Matrix<Jet>, Vec<Jet>), DomainError> {
        let n = self.spec.dof();
        let dim = 2 * n + 1;
        let omega = self.omega(x)?;
        let mut a = Matrix::zeros(self.row_count(), dim);
        let mut b = vec![Jet::constant(0.0); self.row_count()];
        for r in 0..dim {
            for c in 0..dim {
                a.set(r, c, omega.get(r, c).clone());
            }
        }
        a.set(dim, 0, Jet::constant(1.0));
        b[dim] = Jet::constant(1.0);
        for i in 0..n {
            let row = dim + 1 + i;
            a.set(row, 1 + i, Jet::constant(1.0));
            a.set(row, 0, -x[1 + n + i].clone());
        }
        Ok((a, b))
    }
}

/// `i_Z Ω_H = 0`, `ṫ = 1` on `(t, q, p_t, p, v)`.
///
/// `H = p_t + p·v − L` and `ω_Q = dp∧dq + dp_t∧dt`, so the `p_t` terms cancel
/// and `Ω_H = dp∧dq − dE∧dt` with `E = p·v − L`. The momentum `p_t` stays in
/// the chart as a pure gauge direction.
///
/// The `dt` component of `i_X Ω_H` is left out of the equations: given
/// `ṫ = 1` and the other components it reduces to `−(∂E/∂v)·v̇`, which
/// vanishes wherever the `dv` rows hold. Keeping it would make the rank of
/// the system drop exactly on the Legendre constraint set.
#[derive(Clone, Debug)]
pub struct SkinnerRuskSystem {
    spec: LagrangianSpec,
    names: Vec<String>,
}

pub fn skinner_rusk_system(spec: &SkinnerRuskSpec) -> SkinnerRuskSystem {
    let l = &spec.0;
    let t = &l.chart.time_variable;
    let mut names = vec![t.clone()];
    names.extend(l.q_names.iter().cloned());
    names.push(momentum_name(t));
    names.extend(l.q_names.iter().map(|q| momentum_name(q)));
    names.extend(l.q_names.iter().map(|q| velocity_name(q)));
    SkinnerRuskSystem {
        spec: l.clone(),
        names,
    }
}

/// Name of the momentum paired with a coordinate.
pub fn momentum_name(q: &str) -> String {
    format!("p_{q}")
}

impl SkinnerRuskSystem {
    pub fn spec(&self) -> &LagrangianSpec {
        &self.spec
    }

    fn q(&self, i: usize) -> usize {
        1 + i
    }

    fn p(&self, i: usize) -> usize {
        2 + self.spec.dof() + i
    }

    fn v(&self, i: usize) -> usize {
        2 + 2 * self.spec.dof() + i
    }

    /// `Ω_H(∂_a, ∂_b)` on the mixed chart.
    pub fn omega<T: Scalar>(&self, x: &[T]) -> Result<Matrix<T>, DomainError> {
        let n = self.spec.dof();
        let dim = self.names.len();
        let mut tqv = vec![x[0].clone()];
        tqv.extend((0..n).map(|i| x[self.q(i)].clone()));
        tqv.extend((0..n).map(|i| x[self.v(i)].clone()));
        let l = self.spec.derivatives(&tqv)?;
        let mut grad_e = vec![T::zero(); dim];
        grad_e[0] = -l.grad[0].clone();
        for i in 0..n {
            grad_e[self.q(i)] = -l.grad[1 + i].clone();
            grad_e[self.p(i)] = x[self.v(i)].clone();
            grad_e[self.v(i)] = x[self.p(i)].clone() - l.grad[1 + n + i].clone();
        }
        let mut omega = Matrix::zeros(dim, dim);
        for i in 0..n {
            let (q, p) = (self.q(i), self.p(i));
            omega.set(p, q, T::one());
            omega.set(q, p, -T::one());
        }
        for a in 1..dim {
            let w = omega.get(a, 0).clone() - grad_e[a].clone();
            omega.set(a, 0, w);
            let w = omega.get(0, a).clone() + grad_e[a].clone();
            omega.set(0, a, w);
        }
        Ok(omega)
    }
}

impl AutonomousSystem for SkinnerRuskSystem {
    fn state_names(&self) -> &[String] {
        &self.names
    }

    fn row_count(&self) -> usize {
        self.names.len()
    }

    fn clock(&self) -> Option<usize> {
        Some(0)
    }

    /// Rows `Ω_H(∂_a, ·)` for every coordinate but time, then `ṫ = 1`.
    fn evaluate(&self, x: &[Jet]) -> Result<(Matrix<Jet>, Vec<Jet>), DomainError> {
        let dim = self.names.len();
        let omega = self.omega(x)?;
        let mut a = Matrix::zeros(dim, dim);
        for r in 1..dim {
            for c in 0..dim {
                a.set(r - 1, c, omega.get(r, c).clone());
            }
        }
        a.set(dim - 1, 0, Jet::constant(1.0));
        let mut b = vec![Jet::constant(0.0); dim];
        b[dim - 1] = Jet::constant(1.0);
        Ok((a, b))
    }
}
