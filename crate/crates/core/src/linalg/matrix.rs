use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use matrixmultiply::CGemmOption;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Read-only strided view used by [`gemm`].
#[derive(Clone, Copy)]
pub struct MatRef<'a> {
    data: &'a [Complex64],
    rows: usize,
    cols: usize,
    row_stride: usize,
    col_stride: usize,
    conj: bool,
}

impl<'a> MatRef<'a> {
    /// Row-major `rows x cols` view over a contiguous slice.
    pub fn row_major(data: &'a [Complex64], rows: usize, cols: usize) -> Self {
        assert!(data.len() >= rows * cols, "slice too short for view");
        MatRef {
            data,
            rows,
            cols,
            row_stride: cols,
            col_stride: 1,
            conj: false,
        }
    }

    /// Row-major view with an explicit row stride, for sub-blocks.
    pub fn strided(data: &'a [Complex64], rows: usize, cols: usize, row_stride: usize) -> Self {
        MatRef {
            data,
            rows,
            cols,
            row_stride,
            col_stride: 1,
            conj: false,
        }
    }

    pub fn transpose(self) -> Self {
        MatRef {
            rows: self.cols,
            cols: self.rows,
            row_stride: self.col_stride,
            col_stride: self.row_stride,
            ..self
        }
    }

    /// Conjugate transpose, without copying.
    pub fn adjoint(self) -> Self {
        MatRef {
            conj: !self.conj,
            ..self.transpose()
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Compact row-major copy with conjugation applied.
    fn conjugated(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self.data[i * self.row_stride + j * self.col_stride];
                out.push(if self.conj { z.conj() } else { z });
            }
        }
        out
    }

    fn check(&self) {
        if self.rows > 0 && self.cols > 0 {
            let last = (self.rows - 1) * self.row_stride + (self.cols - 1) * self.col_stride;
            assert!(last < self.data.len(), "strided view out of bounds");
        }
    }
}

/// Mutable row-major view used as a [`gemm`] destination.
pub struct MatMut<'a> {
    data: &'a mut [Complex64],
    rows: usize,
    cols: usize,
    row_stride: usize,
}

impl<'a> MatMut<'a> {
    pub fn row_major(data: &'a mut [Complex64], rows: usize, cols: usize) -> Self {
        assert!(data.len() >= rows * cols, "slice too short for view");
        MatMut {
            data,
            rows,
            cols,
            row_stride: cols,
        }
    }

    pub fn strided(data: &'a mut [Complex64], rows: usize, cols: usize, row_stride: usize) -> Self {
        if rows > 0 && cols > 0 {
            assert!((rows - 1) * row_stride + cols <= data.len(), "strided view out of bounds");
        }
        MatMut {
            data,
            rows,
            cols,
            row_stride,
        }
    }
}

/// `c <- alpha * a * b + beta * c`.
pub fn gemm(alpha: Complex64, a: MatRef<'_>, b: MatRef<'_>, beta: Complex64, c: MatMut<'_>) {
    assert_eq!(a.cols, b.rows, "gemm inner dimensions differ");
    assert_eq!(a.rows, c.rows, "gemm row count differs");
    assert_eq!(b.cols, c.cols, "gemm column count differs");
    a.check();
    b.check();
    if c.rows == 0 || c.cols == 0 {
        return;
    }
    // The backend has no conjugating mode; conjugated operands are
    // materialized, which is O(n^2) against the O(n^3) product.
    let a_buf;
    let a = if a.conj {
        a_buf = a.conjugated();
        MatRef::row_major(&a_buf, a.rows, a.cols)
    } else {
        a
    };
    let b_buf;
    let b = if b.conj {
        b_buf = b.conjugated();
        MatRef::row_major(&b_buf, b.rows, b.cols)
    } else {
        b
    };
    // SAFETY: the views were bounds-checked above, `Complex64` is
    // `repr(C)` with the same layout as `[f64; 2]`, and `c` is borrowed
    // mutably so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            a.rows,
            a.cols,
            b.cols,
            [alpha.re, alpha.im],
            a.data.as_ptr() as *const [f64; 2],
            a.row_stride as isize,
            a.col_stride as isize,
            b.data.as_ptr() as *const [f64; 2],
            b.row_stride as isize,
            b.col_stride as isize,
            [beta.re, beta.im],
            c.data.as_mut_ptr() as *mut [f64; 2],
            c.row_stride as isize,
            1,
        );
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        ComplexMatrix::from_vec(raw.dim, raw.data)
    }
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        RawMatrix {
            dim: m.dim,
            data: m.data,
        }
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("matrix dimension must be positive".into()));
        }
        ensure_dim(dim * dim, data.len())?;
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = z;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn view(&self) -> MatRef<'_> {
        MatRef::row_major(&self.data, self.dim, self.dim)
    }

    pub fn view_mut(&mut self) -> MatMut<'_> {
        MatMut::row_major(&mut self.data, self.dim, self.dim)
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self.data[j * d + i].conj())
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self.data[j * d + i])
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.dim);
        gemm(ONE, self.view(), rhs.view(), ZERO, out.view_mut());
        out
    }

    /// `self * rhs + other * lhs2`, used by product-rule updates.
    pub fn matmul_add(&self, rhs: &ComplexMatrix, lhs2: &ComplexMatrix, rhs2: &ComplexMatrix) -> Self {
        let mut out = self.matmul(rhs);
        gemm(ONE, lhs2.view(), rhs2.view(), ONE, out.view_mut());
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim, "axpy dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    pub fn add_identity(&mut self, alpha: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += alpha;
        }
    }

    /// Linear combination `sum_k coeffs[k] * mats[k] + diag * I`.
    pub fn combination(terms: &[(f64, &ComplexMatrix)], diag: f64) -> ComplexMatrix {
        let dim = terms
            .first()
            .map(|(_, m)| m.dim)
            .expect("combination needs at least one term");
        let mut out = ComplexMatrix::zeros(dim);
        for &(c, m) in terms {
            out.axpy(c, m);
        }
        out.add_identity(diag);
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let d = self.dim;
        (0..d)
            .map(|j| (0..d).map(|i| self.data[i * d + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Real inner product `Re tr(self^H other)`, the pairing used for all
    /// cotangents in this crate.
    pub fn real_inner(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Largest entry of `|X + X^H|`; zero exactly for skew-Hermitian input.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let s = self.data[i * d + j] + self.data[j * d + i].conj();
                worst = worst.max(s.norm());
            }
        }
        worst
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let (p, q) = (self.dim, rhs.dim);
        ComplexMatrix::from_fn(p * q, |i, j| {
            self.data[(i / q) * p + j / q] * rhs.data[(i % q) * q + j % q]
        })
    }

    /// Block-diagonal matrix `diag(blocks...)`.
    pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut out = ComplexMatrix::zeros(dim);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    out.data[(offset + i) * dim + offset + j] = b.data[i * b.dim + j];
                }
            }
            offset += b.dim;
        }
        out
    }

    /// Extract the `size x size` sub-block starting at `(row, col)`.
    pub fn sub_block(&self, row: usize, col: usize, size: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(size, |i, j| self.data[(row + i) * self.dim + col + j])
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim.min(8) {
            write!(f, "  ")?;
            for z in self.row(i).iter().take(8) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
