//! Symmetric sparse matrices over real or complex scalars.

use std::fmt::{Debug, Write as _};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Real,
    Complex,
}

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Mul<f64, Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    const KIND: ScalarKind;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs2(self) -> f64;
    fn re(self) -> f64;
    fn is_finite(self) -> bool;
    fn fmt_value(self) -> String;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const KIND: ScalarKind = ScalarKind::Real;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn fmt_value(self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const ONE: Self = Complex64::new(1.0, 0.0);
    const KIND: ScalarKind = ScalarKind::Complex;
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn fmt_value(self) -> String {
        format!("{:?} {:?}", self.re, self.im)
    }
}

/// Accumulates upper-triangle coordinate entries before [`finalize`](Self::finalize).
#[derive(Clone, Debug)]
pub struct SymBuilder<T> {
    dim: usize,
    coo: Vec<(usize, usize, T)>,
}

impl<T: Scalar> SymBuilder<T> {
    pub fn new(dim: usize) -> Self {
        SymBuilder { dim, coo: Vec::new() }
    }

    /// Adds `v` at `(i, j)` and, implicitly, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.coo.push((r, c, v));
    }

    /// Adds a symmetric element block: `local[a][b]` goes to `(ids[a], ids[b])`.
    pub fn add_local<const N: usize>(&mut self, ids: &[usize; N], local: &[[T; N]; N]) {
        for a in 0..N {
            for b in a..N {
                if ids[a] == ids[b] && a != b {
                    // repeated id: both halves land on the diagonal
                    self.add(ids[a], ids[b], local[a][b] + local[b][a]);
                } else {
                    self.add(ids[a], ids[b], local[a][b]);
                }
            }
        }
    }

    pub fn extend(&mut self, other: SymBuilder<T>) {
        self.coo.extend(other.coo);
    }

    /// Sorts and merges duplicates. Summation follows the sorted order of the
    /// contributions' insertion, so the result does not depend on how element
    /// loops were scheduled as long as each contribution list is in the same
    /// order.
    pub fn finalize(mut self) -> SymSparse<T> {
        self.coo.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut upper: Vec<(usize, usize, T)> = Vec::with_capacity(self.coo.len());
        for (i, j, v) in self.coo {
            match upper.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => upper.push((i, j, v)),
            }
        }
        SymSparse::from_upper(self.dim, upper)
    }
}

/// Symmetric matrix stored as its sorted upper triangle plus a full CSR copy
/// for products.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSparse<T = f64> {
    dim: usize,
    upper: Vec<(usize, usize, T)>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

const PAR_THRESHOLD: usize = 20_000;

impl<T: Scalar> SymSparse<T> {
    fn from_upper(dim: usize, upper: Vec<(usize, usize, T)>) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(i, j, _) in &upper {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for r in 0..dim {
            counts[r + 1] += counts[r];
        }
        let nnz = counts[dim];
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![T::ZERO; nnz];
        let mut fill = counts.clone();
        // lower part first so every row comes out column-sorted
        for &(i, j, v) in &upper {
            if i != j {
                cols[fill[j]] = i;
                vals[fill[j]] = v;
                fill[j] += 1;
            }
        }
        for &(i, j, v) in &upper {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }
        let mut m = SymSparse {
            dim,
            upper,
            row_ptr: counts,
            cols,
            vals,
        };
        m.sort_rows();
        m
    }

    fn sort_rows(&mut self) {
        for r in 0..self.dim {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut idx: Vec<usize> = (a..b).collect();
            idx.sort_by_key(|&k| self.cols[k]);
            let c: Vec<usize> = idx.iter().map(|&k| self.cols[k]).collect();
            let v: Vec<T> = idx.iter().map(|&k| self.vals[k]).collect();
            self.cols[a..b].copy_from_slice(&c);
            self.vals[a..b].copy_from_slice(&v);
        }
    }

    pub fn zeros(dim: usize) -> Self {
        SymSparse::from_upper(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        T::KIND
    }

    /// Upper-triangle entries `(row, col, value)` with `row <= col`, sorted.
    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.upper
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(k) => self.vals[a + k],
            Err(_) => T::ZERO,
        }
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`. Rows are independent, so the parallel path gives the same
    /// bits as the serial one.
    pub fn matvec_into<U>(&self, x: &[U], y: &mut [U])
    where
        U: Scalar + Mul<T, Output = U>,
    {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row = |r: usize| {
            let mut s = U::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += x[self.cols[k]] * self.vals[k];
            }
            s
        };
        if self.dim >= PAR_THRESHOLD {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        } else {
            for (r, out) in y.iter_mut().enumerate() {
                *out = row(r);
            }
        }
    }

    pub fn matvec<U>(&self, x: &[U]) -> Vec<U>
    where
        U: Scalar + Mul<T, Output = U>,
    {
        let mut y = vec![U::ZERO; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    /// `x^T A y` without conjugation.
    pub fn bilinear<U>(&self, x: &[U], y: &[U]) -> U
    where
        U: Scalar + Mul<T, Output = U>,
    {
        let ay = self.matvec(y);
        x.iter().zip(&ay).fold(U::ZERO, |s, (&a, &b)| s + a * b)
    }

    /// Sum of all entries, `1^T A 1`.
    pub fn total(&self) -> T {
        self.upper
            .iter()
            .fold(T::ZERO, |s, &(i, j, v)| if i == j { s + v } else { s + v + v })
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k].abs2().sqrt())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|e| e.2 == T::ZERO)
    }

    /// Submatrix on the index set `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> SymSparse<T> {
        let mut map = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut upper = Vec::new();
        for &(i, j, v) in &self.upper {
            let (a, b) = (map[i], map[j]);
            if a != usize::MAX && b != usize::MAX {
                upper.push(if a <= b { (a, b, v) } else { (b, a, v) });
            }
        }
        upper.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        SymSparse::from_upper(keep.len(), upper)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::ZERO; self.dim]; self.dim];
        for &(i, j, v) in &self.upper {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }

    /// Sorted coordinate listing `i j value`, upper triangle only; complex
    /// values print as `re im`.
    pub fn export_coo(&self) -> String {
        let mut s = String::new();
        for &(i, j, v) in &self.upper {
            let _ = writeln!(s, "{i} {j} {}", v.fmt_value());
        }
        s
    }
}

impl SymSparse<f64> {
    pub fn to_complex(&self) -> SymSparse<Complex64> {
        let upper = self
            .upper
            .iter()
            .map(|&(i, j, v)| (i, j, Complex64::new(v, 0.0)))
            .collect();
        SymSparse::from_upper(self.dim, upper)
    }
}

/// `sum_k c_k A_k` over matrices of equal dimension.
pub fn combine<T: Scalar>(terms: &[(T, &SymSparse<f64>)]) -> Result<SymSparse<T>> {
    let dim = terms.first().map_or(0, |t| t.1.dim);
    let mut b = SymBuilder::new(dim);
    for (c, m) in terms {
        if m.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.dim,
            });
        }
        for &(i, j, v) in &m.upper {
            b.coo.push((i, j, *c * v));
        }
    }
    Ok(b.finalize())
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::ZERO, |s, (&x, &y)| s + x * y)
}

/// Hermitian norm.
pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs2()).sum::<f64>().sqrt()
}
