//! Dense linear algebra at a point.
//!
//! Everything here is Gauss–Jordan elimination with a fixed pivot strategy:
//! columns are scanned left to right and the pivot row is the one with the
//! largest absolute real part (first one on ties). An entry counts as a
//! pivot only when it exceeds the rank threshold. Pivot decisions look at
//! real parts only, so running the same elimination over dual or jet
//! carriers differentiates the resulting frames exactly, as long as the
//! pivot pattern is locally constant.

use thiserror::Error;

use crate::ad::Scalar;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular system")]
    Singular,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            nrows,
            ncols,
            data: vec![T::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds from rows; all rows must share a length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
            return Err(LinalgError::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {ncols}",
                rows[bad].len()
            )));
        }
        Ok(Matrix {
            nrows,
            ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Matrix { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.nrows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.ncols, other.nrows);
        Self::from_fn(self.nrows, other.ncols, |i, j| {
            (0..self.ncols).fold(T::zero(), |acc, k| {
                acc + self.get(i, k).clone() * other.get(k, j).clone()
            })
        })
    }

    /// Largest absolute real part.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.re().abs()))
    }

    /// Real parts.
    pub fn re(&self) -> Matrix<f64> {
        Matrix {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(Scalar::re).collect(),
        }
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(LinalgError::NonFinite {
                row: k / self.ncols,
                col: k % self.ncols,
            }),
            None => Ok(()),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.ncols {
                self.data.swap(a * self.ncols + j, b * self.ncols + j);
            }
        }
    }

    /// `row[dst] -= factor * row[src]`
    fn axpy_row(&mut self, dst: usize, src: usize, factor: &T) {
        for j in 0..self.ncols {
            let s = &self.data[src * self.ncols + j];
            if s.is_exact_zero() {
                continue;
            }
            let p = factor.mul_ref(s);
            self.data[dst * self.ncols + j].sub_assign_ref(&p);
        }
    }

    fn scale_row(&mut self, i: usize, inv: &T) {
        for j in 0..self.ncols {
            let v = &mut self.data[i * self.ncols + j];
            if !v.is_exact_zero() {
                *v = v.mul_ref(inv);
            }
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        if x.is_exact_zero() || y.is_exact_zero() {
            acc
        } else {
            acc + x.clone() * y.clone()
        }
    })
}

/// Rank threshold: an entry is a pivot iff `|entry| > max(rel·‖A‖_max, abs)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { rel, abs: 0.0 }
    }

    fn threshold(&self, norm: f64) -> f64 {
        (self.rel * norm).max(self.abs)
    }
}

/// Rank and bases of both nullspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct NullspaceResult<T> {
    pub rank: usize,
    /// Spans `Ker A`.
    pub right_basis: Vec<Vec<T>>,
    /// Spans `Ker Aᵀ`.
    pub left_basis: Vec<Vec<T>>,
    /// `(original row, column)` of each pivot, in elimination order.
    pub pivot_pattern: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveResult<T> {
    Consistent {
        particular: Vec<T>,
        nullspace: Vec<Vec<T>>,
    },
    Inconsistent {
        violated_rows: Vec<usize>,
        residuals: Vec<f64>,
    },
}

/// Reduced row echelon form of `A` (optionally augmented by `b`) together
/// with the row transform that produced it.
#[derive(Clone, Debug)]
pub struct Elimination<T> {
    reduced: Matrix<T>,
    /// Absent when only solutions and right kernels are needed.
    transform: Option<Matrix<T>>,
    rhs: Option<Vec<T>>,
    /// Original row index at each position after swaps.
    order: Vec<usize>,
    pivots: Vec<(usize, usize)>,
    norm: f64,
    rhs_norm: f64,
}

impl<T: Scalar> Elimination<T> {
    pub fn new(a: &Matrix<T>, b: Option<&[T]>, tol: Tolerance) -> Result<Self, LinalgError> {
        Self::build(a, b, tol, true)
    }

    /// Like [`Elimination::new`] but without the row transform, so
    /// [`Elimination::left_basis`] is unavailable.
    pub fn without_transform(a: &Matrix<T>, b: Option<&[T]>, tol: Tolerance) -> Result<Self, LinalgError> {
        Self::build(a, b, tol, false)
    }

    fn build(a: &Matrix<T>, b: Option<&[T]>, tol: Tolerance, track: bool) -> Result<Self, LinalgError> {
        a.check_finite()?;
        if let Some(b) = b {
            if b.len() != a.nrows {
                return Err(LinalgError::DimensionMismatch(format!(
                    "rhs has {} entries for {} rows",
                    b.len(),
                    a.nrows
                )));
            }
            if let Some(row) = b.iter().position(|v| !v.is_finite()) {
                return Err(LinalgError::NonFinite { row, col: a.ncols });
            }
        }
        let (m, n) = (a.nrows, a.ncols);
        let norm = a.max_abs();
        let rhs_norm = b.map_or(0.0, |b| b.iter().fold(0.0_f64, |m, v| m.max(v.re().abs())));
        let threshold = tol.threshold(norm);
        let mut work = a.clone();
        let mut transform = track.then(|| Matrix::identity(m));
        let mut rhs = b.map(<[T]>::to_vec);
        let mut order: Vec<usize> = (0..m).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..n {
            if r == m {
                break;
            }
            let mut best = r;
            let mut best_abs = work.get(r, c).re().abs();
            for i in r + 1..m {
                let v = work.get(i, c).re().abs();
                if v > best_abs {
                    best = i;
                    best_abs = v;
                }
            }
            if best_abs <= threshold {
                continue;
            }
            work.swap_rows(r, best);
            if let Some(tr) = transform.as_mut() {
                tr.swap_rows(r, best);
            }
            order.swap(r, best);
            if let Some(rhs) = rhs.as_mut() {
                rhs.swap(r, best);
            }
            let inv = T::one() / work.get(r, c).clone();
            work.scale_row(r, &inv);
            work.set(r, c, T::one());
            if let Some(tr) = transform.as_mut() {
                tr.scale_row(r, &inv);
            }
            if let Some(rhs) = rhs.as_mut() {
                rhs[r] = rhs[r].clone() * inv.clone();
            }
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = work.get(i, c).clone();
                if f.is_exact_zero() {
                    continue;
                }
                work.axpy_row(i, r, &f);
                work.set(i, c, T::zero());
                if let Some(tr) = transform.as_mut() {
                    tr.axpy_row(i, r, &f);
                }
                if let Some(rhs) = rhs.as_mut() {
                    rhs[i] = rhs[i].clone() - f.clone() * rhs[r].clone();
                }
            }
            pivots.push((order[r], c));
            r += 1;
        }
        Ok(Elimination {
            reduced: work,
            transform,
            rhs,
            order,
            pivots,
            norm,
            rhs_norm,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_pattern(&self) -> &[(usize, usize)] {
        &self.pivots
    }

    /// One vector per free column, with that column set to one.
    pub fn right_basis(&self) -> Vec<Vec<T>> {
        let n = self.reduced.ncols;
        let mut is_pivot = vec![false; n];
        for &(_, c) in &self.pivots {
            is_pivot[c] = true;
        }
        (0..n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut u = vec![T::zero(); n];
                u[f] = T::one();
                for (k, &(_, c)) in self.pivots.iter().enumerate() {
                    u[c] = -self.reduced.get(k, f).clone();
                }
                u
            })
            .collect()
    }

    /// One covector per non-pivot row, with that row's own coefficient equal
    /// to one; ordered by original row index.
    pub fn left_basis(&self) -> Vec<Vec<T>> {
        let mut rows: Vec<(usize, usize)> = (self.rank()..self.reduced.nrows)
            .map(|k| (self.order[k], k))
            .collect();
        rows.sort_unstable();
        rows.into_iter()
            .map(|(_, k)| {
                let tr = self.transform.as_ref().expect("elimination built without transform");
                tr.row(k).to_vec()
            })
            .collect()
    }

    /// Basic solution (free variables zero) of the pivot rows.
    pub fn basic_solution(&self) -> Vec<T> {
        let rhs = self.rhs.as_ref().expect("elimination without right-hand side");
        let mut x = vec![T::zero(); self.reduced.ncols];
        for (k, &(_, c)) in self.pivots.iter().enumerate() {
            x[c] = rhs[k].clone();
        }
        x
    }

    /// Minimal-norm solution of the pivot rows: the basic solution with its
    /// component along `Ker A` removed. Rows that are inconsistent are ignored.
    pub fn min_norm_solution(&self, nullspace: &[Vec<T>]) -> Result<Vec<T>, LinalgError> {
        let x = self.basic_solution();
        orthogonal_complement(&x, nullspace)
    }

    /// Reduced residuals of the non-pivot rows whose magnitude exceeds
    /// `tol·max(‖A‖_max, ‖b‖_max)`, as `(original row, residual)`.
    pub fn violations(&self, tol: f64) -> Vec<(usize, f64)> {
        let rhs = self.rhs.as_ref().expect("elimination without right-hand side");
        let limit = tol * self.norm.max(self.rhs_norm);
        let mut out: Vec<(usize, f64)> = (self.rank()..self.reduced.nrows)
            .filter_map(|k| {
                let r = rhs[k].re();
                (r.abs() > limit).then_some((self.order[k], r))
            })
            .collect();
        out.sort_by_key(|&(row, _)| row);
        out
    }

}

/// `x − N(NᵀN)⁻¹Nᵀx` for the columns `N` given as vectors.
pub fn orthogonal_complement<T: Scalar>(x: &[T], basis: &[Vec<T>]) -> Result<Vec<T>, LinalgError> {
    if basis.is_empty() {
        return Ok(x.to_vec());
    }
    let k = basis.len();
    let gram = Matrix::from_fn(k, k, |i, j| dot(&basis[i], &basis[j]));
    let proj: Vec<T> = basis.iter().map(|u| dot(u, x)).collect();
    let coeffs = solve_square(&gram, &proj)?;
    let mut out = x.to_vec();
    for (u, c) in basis.iter().zip(&coeffs) {
        for (o, ui) in out.iter_mut().zip(u) {
            if !ui.is_exact_zero() {
                *o = o.clone() - c.clone() * ui.clone();
            }
        }
    }
    Ok(out)
}

/// Solves a square nonsingular system by partial-pivot elimination.
pub fn solve_square<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    if a.nrows != a.ncols || b.len() != a.nrows {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} system with {} right-hand entries",
            a.nrows,
            a.ncols,
            b.len()
        )));
    }
    let elim = Elimination::new(a, Some(b), Tolerance { rel: 1e-14, abs: 0.0 })?;
    if elim.rank() < a.ncols {
        return Err(LinalgError::Singular);
    }
    Ok(elim.basic_solution())
}

/// Rank, right and left nullspace bases with threshold `tol·‖A‖_max`.
pub fn rank_nullspaces<T: Scalar>(a: &Matrix<T>, tol: f64) -> Result<NullspaceResult<T>, LinalgError> {
    rank_nullspaces_with(a, Tolerance::relative(tol))
}

pub fn rank_nullspaces_with<T: Scalar>(
    a: &Matrix<T>,
    tol: Tolerance,
) -> Result<NullspaceResult<T>, LinalgError> {
    let elim = Elimination::new(a, None, tol)?;
    Ok(NullspaceResult {
        rank: elim.rank(),
        right_basis: elim.right_basis(),
        left_basis: elim.left_basis(),
        pivot_pattern: elim.pivots.clone(),
    })
}

/// Solves `A·x = b` when consistent, returning the minimal-norm solution and a
/// basis of `Ker A`; otherwise the rows whose reduced residual exceeds
/// `tol·max(‖A‖_max, ‖b‖_max)`.
pub fn solve_consistent<T: Scalar>(
    a: &Matrix<T>,
    b: &[T],
    tol: f64,
) -> Result<SolveResult<T>, LinalgError> {
    let elim = Elimination::new(a, Some(b), Tolerance::relative(tol))?;
    let violations = elim.violations(tol);
    if !violations.is_empty() {
        let (violated_rows, residuals) = violations.into_iter().unzip();
        return Ok(SolveResult::Inconsistent {
            violated_rows,
            residuals,
        });
    }
    let nullspace = elim.right_basis();
    let particular = elim.min_norm_solution(&nullspace)?;
    Ok(SolveResult::Consistent {
        particular,
        nullspace,
    })
}
