//! Blocked LU factorization with partial pivoting.
//!
//! Panels of `BLOCK` columns are factored with scalar code; the trailing
//! update and both triangular solves push their bulk work through `gemm`.

use num_complex::Complex64;

use super::matrix::{gemm, ComplexMatrix, MatMut, MatRef};
use crate::error::{Error, Result};

const BLOCK: usize = 64;
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `P A = L U`, with unit-lower `L` and upper `U` packed in one buffer.
#[derive(Clone, Debug)]
pub struct LuFactors {
    dim: usize,
    lu: Vec<Complex64>,
    // row `j` was swapped with row `pivots[j]` at step `j`
    pivots: Vec<usize>,
}

/// `dst_row -= coef * src_row` for two distinct rows of a row-major buffer.
fn row_axpy(buf: &mut [Complex64], width: usize, dst: usize, src: usize, coef: Complex64, cols: std::ops::Range<usize>) {
    debug_assert_ne!(dst, src);
    let (d, s) = if dst < src {
        let (lo, hi) = buf.split_at_mut(src * width);
        (&mut lo[dst * width..(dst + 1) * width], &hi[..width])
    } else {
        let (lo, hi) = buf.split_at_mut(dst * width);
        (&mut hi[..width], &lo[src * width..(src + 1) * width])
    };
    for c in cols {
        d[c] -= coef * s[c];
    }
}

fn swap_rows(buf: &mut [Complex64], width: usize, a: usize, b: usize) {
    if a == b {
        return;
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let (first, second) = buf.split_at_mut(hi * width);
    first[lo * width..(lo + 1) * width].swap_with_slice(&mut second[..width]);
}

pub fn lu_factor(a: &ComplexMatrix) -> Result<LuFactors> {
    let n = a.dim();
    let mut lu = a.as_slice().to_vec();
    let mut pivots = vec![0; n];

    let mut k0 = 0;
    while k0 < n {
        let k1 = (k0 + BLOCK).min(n);

        for j in k0..k1 {
            let (p, best) = (j..n)
                .map(|i| (i, lu[i * n + j].norm()))
                .fold((j, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Domain(format!("matrix is singular at pivot {j}")));
            }
            pivots[j] = p;
            swap_rows(&mut lu, n, j, p);
            let inv = lu[j * n + j].inv();
            for i in j + 1..n {
                lu[i * n + j] *= inv;
                let l = lu[i * n + j];
                if l != Complex64::new(0.0, 0.0) {
                    row_axpy(&mut lu, n, i, j, l, j + 1..k1);
                }
            }
        }

        if k1 < n {
            // U12 <- L11^{-1} A12
            for j in k0..k1 {
                for i in j + 1..k1 {
                    let l = lu[i * n + j];
                    row_axpy(&mut lu, n, i, j, l, k1..n);
                }
            }
            // A22 <- A22 - L21 U12
            let rest = n - k1;
            let width = k1 - k0;
            let mut l21 = Vec::with_capacity(rest * width);
            for i in k1..n {
                l21.extend_from_slice(&lu[i * n + k0..i * n + k1]);
            }
            let mut u12 = Vec::with_capacity(width * rest);
            for i in k0..k1 {
                u12.extend_from_slice(&lu[i * n + k1..(i + 1) * n]);
            }
            gemm(
                -ONE,
                MatRef::row_major(&l21, rest, width),
                MatRef::row_major(&u12, width, rest),
                ONE,
                MatMut::strided(&mut lu[k1 * n + k1..], rest, rest, n),
            );
        }
        k0 = k1;
    }
    Ok(LuFactors { dim: n, lu, pivots })
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solve `A X = B` for a square right-hand side.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.dim(), self.dim, "right-hand side dimension mismatch");
        let n = self.dim;
        let m = n;
        let lu = &self.lu;
        let mut x = b.as_slice().to_vec();

        for (j, &p) in self.pivots.iter().enumerate() {
            swap_rows(&mut x, m, j, p);
        }

        // forward substitution, unit lower
        let mut k0 = 0;
        while k0 < n {
            let k1 = (k0 + BLOCK).min(n);
            if k0 > 0 {
                let (done, todo) = x.split_at_mut(k0 * m);
                gemm(
                    -ONE,
                    MatRef::strided(&lu[k0 * n..], k1 - k0, k0, n),
                    MatRef::row_major(done, k0, m),
                    ONE,
                    MatMut::row_major(todo, k1 - k0, m),
                );
            }
            for j in k0..k1 {
                for i in j + 1..k1 {
                    row_axpy(&mut x, m, i, j, lu[i * n + j], 0..m);
                }
            }
            k0 = k1;
        }

        // back substitution, upper
        let mut k1 = n;
        while k1 > 0 {
            let k0 = k1.saturating_sub(BLOCK);
            if k1 < n {
                let (todo, done) = x.split_at_mut(k1 * m);
                gemm(
                    -ONE,
                    MatRef::strided(&lu[k0 * n + k1..], k1 - k0, n - k1, n),
                    MatRef::row_major(done, n - k1, m),
                    ONE,
                    MatMut::row_major(&mut todo[k0 * m..], k1 - k0, m),
                );
            }
            for j in (k0..k1).rev() {
                let inv = lu[j * n + j].inv();
                for v in &mut x[j * m..(j + 1) * m] {
                    *v *= inv;
                }
                for i in k0..j {
                    row_axpy(&mut x, m, i, j, lu[i * n + j], 0..m);
                }
            }
            k1 = k0;
        }

        ComplexMatrix::from_vec(n, x).expect("solution has the right shape")
    }
}
