//! Forward-mode automatic differentiation carriers.
//!
//! Every numeric routine in the crate is written once against [`Scalar`] and
//! then evaluated over one of the carriers below:
//!
//! - `f64`: plain values.
//! - [`Dual`]: value plus gradient (first derivatives in a fixed set of directions).
//! - [`HyperDual`]: value, gradient and symmetric Hessian, generic over its base scalar.
//! - [`Jet`]: truncated multilinear algebra over nilpotent generators
//!   `ε₁ … ε_k` with `εᵢ² = 0`. Each nested directional derivative adds one
//!   generator, so derivatives of arbitrary depth compose through linear
//!   algebra without knowing the depth at compile time.

mod dual;
mod jet;

pub use dual::{Dual, HyperDual, Scalar2};
pub use jet::Jet;

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number-like carrier used by expression evaluation and elimination.
///
/// `re` exposes the real part, which is what pivoting and domain checks look at.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn re(&self) -> f64;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    /// Power with a constant real exponent.
    fn powf(&self, p: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn scale(&self, k: f64) -> Self {
        self.clone() * Self::from_f64(k)
    }

    /// `self·other` without consuming either operand.
    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }

    /// `self −= other` in place.
    fn sub_assign_ref(&mut self, other: &Self) {
        *self = self.clone() - other.clone();
    }

    /// True only when every component is exactly zero.
    fn is_exact_zero(&self) -> bool;

    /// True when every component is finite.
    fn is_finite(&self) -> bool {
        self.re().is_finite()
    }
}

/// `x^p` with an exact integer path so that all carriers agree on values.
pub(crate) fn real_pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powf(&self, p: f64) -> Self {
        real_pow(*self, p)
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}
