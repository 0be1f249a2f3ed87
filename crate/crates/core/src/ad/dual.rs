use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{real_pow, Scalar};

/// Value and gradient. Constants carry an empty gradient, read as zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            grad: Vec::new(),
        }
    }

    /// The `index`-th of `n` independent variables.
    pub fn variable(value: f64, index: usize, n: usize) -> Self {
        let mut grad = vec![0.0; n];
        grad[index] = 1.0;
        Self { value, grad }
    }

    fn zip(&self, other: &Dual, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let n = self.grad.len().max(other.grad.len());
        (0..n)
            .map(|i| {
                f(
                    self.grad.get(i).copied().unwrap_or(0.0),
                    other.grad.get(i).copied().unwrap_or(0.0),
                )
            })
            .collect()
    }

    fn chain(&self, value: f64, d1: f64) -> Dual {
        Dual {
            value,
            grad: self.grad.iter().map(|g| d1 * g).collect(),
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value + rhs.value,
            grad: self.zip(&rhs, |a, b| a + b),
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            value: self.value - rhs.value,
            grad: self.zip(&rhs, |a, b| a - b),
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        let (av, bv) = (self.value, rhs.value);
        Dual {
            value: av * bv,
            grad: self.zip(&rhs, |ga, gb| ga * bv + gb * av),
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let q = self.value / rhs.value;
        let bv = rhs.value;
        Dual {
            value: q,
            grad: self.zip(&rhs, |ga, gb| (ga - q * gb) / bv),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
        }
    }
}

impl Scalar for Dual {
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }
    fn re(&self) -> f64 {
        self.value
    }
    fn sin(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c)
    }
    fn cos(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s)
    }
    fn tan(&self) -> Self {
        let t = self.value.tan();
        self.chain(t, 1.0 + t * t)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(&self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn sqrt(&self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }
    fn powf(&self, p: f64) -> Self {
        let (v, d1, _) = pow_derivs(self.value, p);
        self.chain(v, d1)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
    fn is_exact_zero(&self) -> bool {
        self.value == 0.0 && self.grad.iter().all(|&g| g == 0.0)
    }
}

/// `(x^p, p·x^(p-1), p(p-1)·x^(p-2))`, with vanishing coefficients short-circuited.
fn pow_derivs(x: f64, p: f64) -> (f64, f64, f64) {
    let v = real_pow(x, p);
    let d1 = if p == 0.0 { 0.0 } else { p * real_pow(x, p - 1.0) };
    let c2 = p * (p - 1.0);
    let d2 = if c2 == 0.0 { 0.0 } else { c2 * real_pow(x, p - 2.0) };
    (v, d1, d2)
}

/// Value, gradient and symmetric Hessian over a base scalar `T`.
///
/// The Hessian is stored dense row-major; empty `grad`/`hess` mean zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperDual<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<T>,
}

/// Second-order carrier over plain reals.
pub type Scalar2 = HyperDual<f64>;

impl<T: Scalar> HyperDual<T> {
    pub fn constant(value: T) -> Self {
        Self {
            value,
            grad: Vec::new(),
            hess: Vec::new(),
        }
    }

    pub fn variable(value: T, index: usize, n: usize) -> Self {
        let mut grad = vec![T::zero(); n];
        grad[index] = T::one();
        Self {
            value,
            grad,
            hess: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_entry(&self, i: usize, j: usize) -> T {
        let n = self.dim();
        if self.hess.is_empty() {
            T::zero()
        } else {
            self.hess[i * n + j].clone()
        }
    }

    fn n2(&self, other: &Self) -> usize {
        self.dim().max(other.dim())
    }

    fn g(&self, i: usize) -> T {
        self.grad.get(i).cloned().unwrap_or_else(T::zero)
    }

    fn h(&self, i: usize, j: usize, n: usize) -> T {
        if self.hess.is_empty() {
            T::zero()
        } else {
            debug_assert_eq!(self.dim(), n);
            self.hess[i * n + j].clone()
        }
    }

    /// `f(u)` given `f(u₀)`, `f'(u₀)`, `f''(u₀)`.
    fn chain(&self, v: T, d1: T, d2: T) -> Self {
        let n = self.dim();
        let grad: Vec<T> = self.grad.iter().map(|g| d1.clone() * g.clone()).collect();
        let mut hess = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                hess.push(
                    d1.clone() * self.h(i, j, n)
                        + d2.clone() * self.grad[i].clone() * self.grad[j].clone(),
                );
            }
        }
        HyperDual {
            value: v,
            grad,
            hess,
        }
    }

    fn is_constant(&self) -> bool {
        self.grad.is_empty()
    }
}

impl<T: Scalar> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = self.n2(&rhs);
        let grad = (0..n).map(|i| self.g(i) + rhs.g(i)).collect();
        let hess = if self.hess.is_empty() && rhs.hess.is_empty() {
            Vec::new()
        } else {
            (0..n * n)
                .map(|k| self.h(k / n, k % n, n) + rhs.h(k / n, k % n, n))
                .collect()
        };
        HyperDual {
            value: self.value + rhs.value,
            grad,
            hess,
        }
    }
}

impl<T: Scalar> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        HyperDual {
            value: -self.value,
            grad: self.grad.into_iter().map(|g| -g).collect(),
            hess: self.hess.into_iter().map(|h| -h).collect(),
        }
    }
}

impl<T: Scalar> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            let s = rhs.value;
            return HyperDual {
                value: self.value * s.clone(),
                grad: self.grad.into_iter().map(|g| g * s.clone()).collect(),
                hess: self.hess.into_iter().map(|h| h * s.clone()).collect(),
            };
        }
        if self.is_constant() {
            return rhs * self;
        }
        let n = self.n2(&rhs);
        let (av, bv) = (self.value.clone(), rhs.value.clone());
        let grad = (0..n)
            .map(|i| self.g(i) * bv.clone() + rhs.g(i) * av.clone())
            .collect();
        let mut hess = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                hess.push(
                    self.h(i, j, n) * bv.clone()
                        + rhs.h(i, j, n) * av.clone()
                        + self.g(i) * rhs.g(j)
                        + rhs.g(i) * self.g(j),
                );
            }
        }
        HyperDual {
            value: av * bv,
            grad,
            hess,
        }
    }
}

impl<T: Scalar> Div for HyperDual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if rhs.is_constant() {
            let d = rhs.value;
            return HyperDual {
                value: self.value / d.clone(),
                grad: self.grad.into_iter().map(|g| g / d.clone()).collect(),
                hess: self.hess.into_iter().map(|h| h / d.clone()).collect(),
            };
        }
        // q·b = a  ⇒  ∇q = (∇a − q∇b)/b,  Hq = (Ha − q·Hb − ∇q∇bᵀ − ∇b∇qᵀ)/b
        let n = self.n2(&rhs);
        let b = rhs.value.clone();
        let q = self.value.clone() / b.clone();
        let grad: Vec<T> = (0..n)
            .map(|i| (self.g(i) - q.clone() * rhs.g(i)) / b.clone())
            .collect();
        let mut hess = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                hess.push(
                    (self.h(i, j, n)
                        - q.clone() * rhs.h(i, j, n)
                        - grad[i].clone() * rhs.g(j)
                        - rhs.g(i) * grad[j].clone())
                        / b.clone(),
                );
            }
        }
        HyperDual {
            value: q,
            grad,
            hess,
        }
    }
}

impl<T: Scalar> Scalar for HyperDual<T> {
    fn from_f64(v: f64) -> Self {
        HyperDual::constant(T::from_f64(v))
    }
    fn re(&self) -> f64 {
        self.value.re()
    }
    fn sin(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s.clone(), c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c.clone(), -s, -c)
    }
    fn tan(&self) -> Self {
        let t = self.value.tan();
        let sec2 = T::one() + t.clone() * t.clone();
        self.chain(t.clone(), sec2.clone(), T::from_f64(2.0) * t * sec2)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e.clone(), e.clone(), e)
    }
    fn ln(&self) -> Self {
        let inv = T::one() / self.value.clone();
        self.chain(self.value.ln(), inv.clone(), -(inv.clone() * inv))
    }
    fn sqrt(&self) -> Self {
        let r = self.value.sqrt();
        let d1 = T::from_f64(0.5) / r.clone();
        let d2 = -(d1.clone() / (T::from_f64(2.0) * self.value.clone()));
        self.chain(r, d1, d2)
    }
    fn powf(&self, p: f64) -> Self {
        let x = &self.value;
        let d1 = if p == 0.0 {
            T::zero()
        } else {
            x.powf(p - 1.0).scale(p)
        };
        let c2 = p * (p - 1.0);
        let d2 = if c2 == 0.0 {
            T::zero()
        } else {
            x.powf(p - 2.0).scale(c2)
        };
        self.chain(x.powf(p), d1, d2)
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(Scalar::is_finite)
            && self.hess.iter().all(Scalar::is_finite)
    }
    fn is_exact_zero(&self) -> bool {
        self.value.is_exact_zero()
            && self.grad.iter().all(Scalar::is_exact_zero)
            && self.hess.iter().all(Scalar::is_exact_zero)
    }
}
