//! Small dense linear algebra: row-major matrices, LU solves and the
//! scaling-and-squaring matrix exponential.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Float, NumAssign, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Entry type of a [`DenseMatrix`]: a real scalar or a complex one.
pub trait MatScalar: Copy + NumAssign + Neg<Output = Self> + Debug + Send + Sync + 'static {
    type Real: Real;
    fn from_real(r: Self::Real) -> Self;
    fn modulus(self) -> Self::Real;
    fn is_finite_entry(self) -> bool;
}

macro_rules! impl_real_scalar {
    ($($t:ty),*) => {$(
        impl MatScalar for $t {
            type Real = $t;
            fn from_real(r: $t) -> Self { r }
            fn modulus(self) -> $t { self.abs() }
            fn is_finite_entry(self) -> bool { <$t>::is_finite(self) }
        }
        impl MatScalar for Complex<$t> {
            type Real = $t;
            fn from_real(r: $t) -> Self { Complex::new(r, 0.0) }
            fn modulus(self) -> $t { self.norm() }
            fn is_finite_entry(self) -> bool { self.re.is_finite() && self.im.is_finite() }
        }
    )*};
}
impl_real_scalar!(f32, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: MatScalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite_entry())
    }

    pub fn scaled(&self, s: S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn map<U: MatScalar>(&self, f: impl Fn(S) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> S::Real {
        let mut sums = vec![S::Real::zero(); self.cols];
        for i in 0..self.rows {
            for (s, &x) in sums.iter_mut().zip(self.row(i)) {
                *s += x.modulus();
            }
        }
        sums.into_iter().fold(S::Real::zero(), Float::max)
    }

    pub fn max_abs(&self) -> S::Real {
        self.data
            .iter()
            .fold(S::Real::zero(), |a, &b| Float::max(a, b.modulus()))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == S::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Solves `self · X = rhs` by LU decomposition with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension {
                expected: self.rows,
                found: rhs.rows,
            });
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut x = rhs.clone();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| {
                    lu[(p, col)]
                        .modulus()
                        .partial_cmp(&lu[(q, col)].modulus())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap();
            if lu[(pivot, col)].modulus() == S::Real::zero() {
                return Err(Error::InvalidInput("singular matrix in LU solve".into()));
            }
            if pivot != col {
                lu.swap_rows(pivot, col);
                x.swap_rows(pivot, col);
            }
            let d = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / d;
                if factor == S::zero() {
                    continue;
                }
                lu[(r, col)] = factor;
                for c in col + 1..n {
                    let v = lu[(col, c)];
                    lu[(r, c)] -= factor * v;
                }
                for c in 0..x.cols {
                    let v = x[(col, c)];
                    x[(r, c)] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let d = lu[(col, col)];
            for c in 0..x.cols {
                let mut acc = x[(col, c)];
                for k in col + 1..n {
                    acc -= lu[(col, k)] * x[(k, c)];
                }
                x[(col, c)] = acc / d;
            }
        }
        Ok(x)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl<S> std::ops::Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for DenseMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Degree of the diagonal Padé approximant used by [`matrix_exponential`].
pub const PADE_DEGREE: usize = 8;

/// Matrix exponential by scaling and squaring with a diagonal `[8/8]` Padé
/// approximant. The matrix is scaled by `2^-s` until its 1-norm is at most
/// 1/2, where the approximant's backward error is below double-precision
/// roundoff.
pub fn matrix_exponential<S: MatScalar>(m: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
    if !m.is_square() {
        return Err(Error::Dimension {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput(
            "matrix exponential of non-finite entries".into(),
        ));
    }
    let n = m.rows();
    let half = <S::Real as Real>::lit(0.5);
    let norm = m.norm_1();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > half {
        scaled_norm *= half;
        squarings += 1;
    }
    let scale = S::from_real(<S::Real as Real>::lit(0.5f64.powi(squarings as i32)));
    let a = m.scaled(scale);

    // c_k = (2q-k)! q! / ((2q)! k! (q-k)!) via the recurrence c_k = c_{k-1}(q-k+1)/(k(2q-k+1)).
    let q = PADE_DEGREE;
    let mut coeff = <S::Real as Real>::lit(1.0);
    let mut numer = DenseMatrix::identity(n);
    let mut denom = DenseMatrix::identity(n);
    let mut power = DenseMatrix::identity(n);
    for k in 1..=q {
        coeff = coeff * <S::Real as Real>::from_usize_lossy(q - k + 1)
            / <S::Real as Real>::from_usize_lossy(k * (2 * q - k + 1));
        power = power.matmul(&a);
        let term = power.scaled(S::from_real(coeff));
        numer = numer.add(&term);
        denom = if k % 2 == 0 {
            denom.add(&term)
        } else {
            denom.sub(&term)
        };
    }
    let mut e = denom.solve(&numer)?;
    for _ in 0..squarings {
        e = e.matmul(&e);
    }
    Ok(e)
}
