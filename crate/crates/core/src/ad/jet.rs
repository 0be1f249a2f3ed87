use std::ops::{Add, Div, Mul, Neg, Sub};

use smallvec::{smallvec, SmallVec};

use super::{real_pow, Scalar};

/// Element of the algebra `ℝ[ε₁, …, ε_k] / (εᵢ²)`.
///
/// Coefficients are indexed by subset bitmask: `coef[S]` multiplies
/// `∏_{i∈S} εᵢ`. A jet with `k` generators stores `2^k` coefficients, and
/// jets with fewer generators are zero-padded when combined, so generator
/// `i` means the same direction everywhere in a computation.
///
/// Nested directional derivatives are taken with [`Jet::lift`] and
/// [`Jet::tangent`]: to get `Df(x)[w]` for jets `x`, `w` with `k`
/// generators, evaluate `f` at `lift(x, w, k)` and read the `ε_{k+1}` part.
#[derive(Debug, PartialEq)]
pub struct Jet {
    coef: SmallVec<[f64; 8]>,
}

impl Clone for Jet {
    fn clone(&self) -> Self {
        Jet {
            coef: SmallVec::from_slice(&self.coef),
        }
    }
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Self { coef: smallvec![v] }
    }

    /// Builds a jet from raw coefficients; the length must be a power of two.
    pub fn from_coefficients(coef: &[f64]) -> Self {
        assert!(coef.len().is_power_of_two(), "jet length must be 2^k");
        Self {
            coef: SmallVec::from_slice(coef),
        }
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    pub fn generators(&self) -> usize {
        self.coef.len().trailing_zeros() as usize
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Coefficient of the monomial `∏_{i∈mask} εᵢ` (zero beyond the stored generators).
    pub fn coefficient(&self, mask: usize) -> f64 {
        self.coef.get(mask).copied().unwrap_or(0.0)
    }

    /// `x + ε_{k+1}·w` where `x` and `w` carry at most `k` generators.
    pub fn lift(x: &Jet, w: &Jet, k: usize) -> Jet {
        debug_assert!(x.generators() <= k && w.generators() <= k);
        let half = 1usize << k;
        let mut coef: SmallVec<[f64; 8]> = smallvec![0.0; half << 1];
        coef[..x.coef.len()].copy_from_slice(&x.coef);
        coef[half..half + w.coef.len()].copy_from_slice(&w.coef);
        Jet { coef }
    }

    /// The `ε_{k+1}` part of a jet, as a jet in the first `k` generators.
    pub fn tangent(&self, k: usize) -> Jet {
        let half = 1usize << k;
        if self.coef.len() <= half {
            return Jet {
                coef: smallvec![0.0; half],
            };
        }
        Jet {
            coef: SmallVec::from_slice(&self.coef[half..half << 1]),
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            coef: self.coef.iter().map(|&c| f(c)).collect(),
        }
    }

    fn map_in_place(mut self, f: impl Fn(f64) -> f64) -> Jet {
        for c in self.coef.iter_mut() {
            *c = f(*c);
        }
        self
    }

    /// `self + sign·rhs`, reusing the storage of `self`.
    fn accumulate(mut self, rhs: &Jet, sign: f64) -> Jet {
        if rhs.coef.len() > self.coef.len() {
            self.coef.resize(rhs.coef.len(), 0.0);
        }
        for (c, r) in self.coef.iter_mut().zip(rhs.coef.iter()) {
            *c += sign * r;
        }
        self
    }

    fn product(&self, other: &Jet) -> Jet {
        if other.coef.len() == 1 {
            let s = other.coef[0];
            return self.map(|c| c * s);
        }
        if self.coef.len() == 1 {
            let s = self.coef[0];
            return other.map(|c| c * s);
        }
        let (a, b) = (&self.coef, &other.coef);
        // lengths are powers of two, so "index in range" is a mask test
        let (ma, mb) = (!(a.len() - 1), !(b.len() - 1));
        let n = a.len().max(b.len());
        let mut coef: SmallVec<[f64; 8]> = smallvec![0.0; n];
        for (s, out) in coef.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut sub = s;
            loop {
                let rest = s ^ sub;
                if sub & ma == 0 && rest & mb == 0 {
                    acc += a[sub] * b[rest];
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & s;
            }
            *out = acc;
        }
        Jet { coef }
    }

    /// Applies a function given its Taylor coefficients `c_n = f⁽ⁿ⁾(x₀)/n!` at the real part.
    fn taylor(&self, coeff: impl Fn(usize) -> f64) -> Jet {
        let k = self.generators();
        let c0 = coeff(0);
        if k == 0 {
            return Jet::constant(c0);
        }
        let mut nil = self.clone();
        nil.coef[0] = 0.0;
        let mut out = Jet {
            coef: smallvec![0.0; 1 << k],
        };
        out.coef[0] = c0;
        let mut power = nil.clone();
        for n in 1..=k {
            let cn = coeff(n);
            if cn != 0.0 {
                for (o, p) in out.coef.iter_mut().zip(power.coef.iter()) {
                    *o += cn * p;
                }
            }
            if n < k {
                power = power.product(&nil);
            }
        }
        out
    }

    fn recip(&self) -> Jet {
        let a0 = self.value();
        self.taylor(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sign / a0.powi(n as i32 + 1)
        })
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.accumulate(&rhs, 1.0)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.accumulate(&rhs, -1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        if rhs.coef.len() == 1 {
            let d = rhs.coef[0];
            return self.map_in_place(|c| c / d);
        }
        self.product(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map_in_place(|c| -c)
    }
}

impl Scalar for Jet {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }

    fn re(&self) -> f64 {
        self.value()
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.taylor(|n| {
            let d = match n % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            d / factorial(n)
        })
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.taylor(|n| {
            let d = match n % 4 {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            };
            d / factorial(n)
        })
    }

    fn tan(&self) -> Self {
        if self.generators() == 0 {
            return Jet::constant(self.value().tan());
        }
        self.sin() / self.cos()
    }

    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.taylor(|n| e / factorial(n))
    }

    fn ln(&self) -> Self {
        let a0 = self.value();
        self.taylor(|n| {
            if n == 0 {
                a0.ln()
            } else {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                sign / (n as f64 * a0.powi(n as i32))
            }
        })
    }

    fn sqrt(&self) -> Self {
        let root = self.value().sqrt();
        let a0 = self.value();
        self.taylor(|n| {
            if n == 0 {
                root
            } else {
                binomial(0.5, n) * a0.powf(0.5 - n as f64)
            }
        })
    }

    fn powf(&self, p: f64) -> Self {
        if self.generators() > 0 && p.fract() == 0.0 && (1.0..=4.0).contains(&p) {
            let mut out = self.clone();
            for _ in 1..p as usize {
                out = out.product(self);
            }
            return out;
        }
        let a0 = self.value();
        self.taylor(|n| {
            if n == 0 {
                return real_pow(a0, p);
            }
            let b = binomial(p, n);
            if b == 0.0 {
                0.0
            } else {
                b * real_pow(a0, p - n as f64)
            }
        })
    }

    fn scale(&self, k: f64) -> Self {
        self.map(|c| c * k)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.product(other)
    }

    fn sub_assign_ref(&mut self, other: &Self) {
        if other.coef.len() > self.coef.len() {
            self.coef.resize(other.coef.len(), 0.0);
        }
        for (c, r) in self.coef.iter_mut().zip(other.coef.iter()) {
            *c -= r;
        }
    }

    fn is_finite(&self) -> bool {
        self.coef.iter().all(|c| c.is_finite())
    }

    fn is_exact_zero(&self) -> bool {
        self.coef.iter().all(|&c| c == 0.0)
    }
}

/// Generalized binomial coefficient `p choose n`.
fn binomial(p: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..n {
        acc *= (p - i as f64) / (i as f64 + 1.0);
        if acc == 0.0 {
            return 0.0;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f(x + ε₁ + ε₂ + ε₃)` exposes f', f'', f''' in the masks 1, 3 and 7.
    fn third_order(f: impl Fn(Jet) -> Jet, x: f64) -> [f64; 4] {
        let mut point = Jet::constant(x);
        for k in 0..3 {
            point = Jet::lift(&point, &Jet::constant(1.0), k);
        }
        let y = f(point);
        [y.coefficient(0), y.coefficient(1), y.coefficient(3), y.coefficient(7)]
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        let d = third_order(|x| x.clone() * x.clone() * x, 2.0);
        assert_eq!(d, [8.0, 12.0, 12.0, 6.0]);
    }

    #[test]
    fn elementary_function_derivatives() {
        let x = 0.7_f64;
        let d = third_order(|j| j.sin(), x);
        assert!((d[1] - x.cos()).abs() < 1e-15);
        assert!((d[2] + x.sin()).abs() < 1e-15);
        assert!((d[3] + x.cos()).abs() < 1e-15);

        let d = third_order(|j| j.ln(), x);
        assert!((d[1] - 1.0 / x).abs() < 1e-14);
        assert!((d[2] + 1.0 / (x * x)).abs() < 1e-13);
        assert!((d[3] - 2.0 / (x * x * x)).abs() < 1e-12);

        let d = third_order(|j| j.powf(-1.5), x);
        assert!((d[1] + 1.5 * x.powf(-2.5)).abs() < 1e-12);
        assert!((d[3] + 1.5 * 2.5 * 3.5 * x.powf(-4.5)).abs() < 1e-10);

        let d = third_order(|j| j.tan(), x);
        let sec2 = 1.0 / (x.cos() * x.cos());
        assert!((d[1] - sec2).abs() < 1e-13);
        assert!((d[2] - 2.0 * x.tan() * sec2).abs() < 1e-12);
    }

    #[test]
    fn integer_power_at_zero_has_no_nan() {
        let d = third_order(|j| j.powf(2.0), 0.0);
        assert_eq!(d, [0.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn lift_and_tangent_take_directional_derivatives() {
        // f(x, y) = x·y at (2, 3) in direction (1, 5): 3 + 2·5 = 13
        let x = Jet::lift(&Jet::constant(2.0), &Jet::constant(1.0), 0);
        let y = Jet::lift(&Jet::constant(3.0), &Jet::constant(5.0), 0);
        let f = x * y;
        assert_eq!(f.tangent(0).value(), 13.0);
        assert_eq!(f.value(), 6.0);
    }

    #[test]
    fn mixed_widths_pad_with_zeros() {
        let a = Jet::from_coefficients(&[1.0, 2.0]);
        let b = Jet::from_coefficients(&[3.0, 0.0, 4.0, 0.0]);
        let c = a * b;
        assert_eq!(c.coefficients(), &[3.0, 6.0, 4.0, 8.0]);
    }
}
