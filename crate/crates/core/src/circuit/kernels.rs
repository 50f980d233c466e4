//! Amplitude-buffer kernels shared by states and their cotangents.
//!
//! Buffers are row-major `batch x 2^n`; wire `w` is bit `n - 1 - w` of the
//! basis index.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{gemm, ComplexMatrix, MatMut, MatRef};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub(crate) fn wire_mask(n_qubits: usize, wire: usize) -> usize {
    1 << (n_qubits - 1 - wire)
}

pub(crate) fn check_wires(n_qubits: usize, wires: &[usize]) -> Result<()> {
    if wires.is_empty() {
        return Err(Error::Contract("wire list is empty".into()));
    }
    for (i, &w) in wires.iter().enumerate() {
        if w >= n_qubits {
            return Err(Error::Contract(format!("wire {w} out of range for {n_qubits} qubits")));
        }
        if wires[..i].contains(&w) {
            return Err(Error::Contract(format!("wire {w} listed twice")));
        }
    }
    Ok(())
}

/// Index bookkeeping for acting on a subset of wires: every basis index is
/// `base + offset[s]`, where `base` has zeros on the group's bits and `s`
/// is the index inside the group (first listed wire most significant).
#[derive(Clone, Debug)]
pub(crate) struct GroupLayout {
    offsets: Vec<usize>,
    bases: Vec<usize>,
    contiguous: bool,
}

impl GroupLayout {
    pub(crate) fn new(n_qubits: usize, wires: &[usize]) -> Result<Self> {
        check_wires(n_qubits, wires)?;
        let k = wires.len();
        let masks: Vec<usize> = wires.iter().map(|&w| wire_mask(n_qubits, w)).collect();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|s| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| s >> (k - 1 - t) & 1 == 1)
                    .map(|(_, &m)| m)
                    .sum()
            })
            .collect();
        let group_bits: usize = masks.iter().sum();
        let bases: Vec<usize> = (0..1usize << n_qubits).filter(|i| i & group_bits == 0).collect();
        let contiguous = k == n_qubits && offsets.iter().enumerate().all(|(s, &o)| s == o);
        Ok(GroupLayout {
            offsets,
            bases,
            contiguous,
        })
    }

    pub(crate) fn group_dim(&self) -> usize {
        self.offsets.len()
    }

    /// `(batch * bases) x 2^k` matrix of group-local amplitude vectors.
    fn gather(&self, amps: &[Complex64], dim: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(amps.len());
        for row in amps.chunks(dim) {
            for &base in &self.bases {
                out.extend(self.offsets.iter().map(|&o| row[base + o]));
            }
        }
        out
    }

    fn scatter(&self, gathered: &[Complex64], amps: &mut [Complex64], dim: usize) {
        let k = self.group_dim();
        let mut chunks = gathered.chunks(k);
        for row in amps.chunks_mut(dim) {
            for &base in &self.bases {
                let local = chunks.next().expect("gathered buffer matches layout");
                for (&o, &v) in self.offsets.iter().zip(local) {
                    row[base + o] = v;
                }
            }
        }
    }
}

/// Applies `u` (of dimension `2^k`) to the group of every row.
pub(crate) fn apply_group_matrix(amps: &[Complex64], dim: usize, layout: &GroupLayout, u: &ComplexMatrix) -> Vec<Complex64> {
    let k = layout.group_dim();
    assert_eq!(u.dim(), k, "operator dimension does not match group");
    let rows = amps.len() / k;
    let mut out = vec![ZERO; amps.len()];
    if layout.contiguous {
        gemm(ONE, MatRef::row_major(amps, rows, k), u.view().transpose(), ZERO, MatMut::row_major(&mut out, rows, k));
        return out;
    }
    let gathered = layout.gather(amps, dim);
    let mut product = vec![ZERO; gathered.len()];
    gemm(
        ONE,
        MatRef::row_major(&gathered, rows, k),
        u.view().transpose(),
        ZERO,
        MatMut::row_major(&mut product, rows, k),
    );
    layout.scatter(&product, &mut out, dim);
    out
}

/// `Σ_r c_r ψ_r^H` over all group-local vectors, the cotangent of the
/// group operator given output cotangents `cot` and inputs `psi`.
pub(crate) fn group_operator_cotangent(psi: &[Complex64], cot: &[Complex64], dim: usize, layout: &GroupLayout) -> ComplexMatrix {
    let k = layout.group_dim();
    let rows = psi.len() / k;
    let mut out = ComplexMatrix::zeros(k);
    let (pg, cg);
    let (p, c): (&[Complex64], &[Complex64]) = if layout.contiguous {
        (psi, cot)
    } else {
        pg = layout.gather(psi, dim);
        cg = layout.gather(cot, dim);
        (&pg, &cg)
    };
    // conj(P) without transposition: adjoint then transpose back
    gemm(
        ONE,
        MatRef::row_major(c, rows, k).transpose(),
        MatRef::row_major(p, rows, k).adjoint().transpose(),
        ZERO,
        out.view_mut(),
    );
    out
}

/// Row-major 2x2 matrix on one wire, in place.
pub(crate) fn apply_single(amps: &mut [Complex64], n_qubits: usize, wire: usize, m: &[Complex64; 4]) {
    let mask = wire_mask(n_qubits, wire);
    for block in amps.chunks_mut(2 * mask) {
        let (lo, hi) = block.split_at_mut(mask);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0] * x + m[1] * y;
            *b = m[2] * x + m[3] * y;
        }
    }
}

/// 2x2 operator cotangent `Σ c ψ^H` for a single-wire gate.
pub(crate) fn single_cotangent(psi: &[Complex64], cot: &[Complex64], n_qubits: usize, wire: usize) -> [Complex64; 4] {
    let mask = wire_mask(n_qubits, wire);
    let mut g = [ZERO; 4];
    for (pb, cb) in psi.chunks(2 * mask).zip(cot.chunks(2 * mask)) {
        let (p0, p1) = pb.split_at(mask);
        let (c0, c1) = cb.split_at(mask);
        for i in 0..mask {
            let (x, y) = (p0[i].conj(), p1[i].conj());
            g[0] += c0[i] * x;
            g[1] += c0[i] * y;
            g[2] += c1[i] * x;
            g[3] += c1[i] * y;
        }
    }
    g
}

/// Flips `target` on basis states where `control` is set.
pub(crate) fn apply_cnot(amps: &mut [Complex64], n_qubits: usize, control: usize, target: usize) {
    let cmask = wire_mask(n_qubits, control);
    let tmask = wire_mask(n_qubits, target);
    let dim = 1usize << n_qubits;
    for row in amps.chunks_mut(dim) {
        for i in 0..dim {
            if i & cmask != 0 && i & tmask == 0 {
                row.swap(i, i | tmask);
            }
        }
    }
}
