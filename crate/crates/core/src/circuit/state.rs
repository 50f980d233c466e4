use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum deviation of a row's squared norm from one.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// `batch` pure states of `n_qubits` wires, stored row-major as
/// `batch x 2^n_qubits` amplitudes.
///
/// Wire 0 is the most significant bit of the basis-state index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateBatch {
    n_qubits: usize,
    batch: usize,
    amplitudes: Vec<Complex64>,
}

impl StateBatch {
    /// Checked constructor: every row must have unit norm.
    pub fn new(n_qubits: usize, batch: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self::from_raw(n_qubits, batch, amplitudes)?;
        if let Some((row, dev)) = s.worst_norm_deviation().filter(|&(_, d)| d > NORM_TOLERANCE) {
            return Err(Error::Domain(format!(
                "row {row} is not normalized (|norm^2 - 1| = {dev:.3e})"
            )));
        }
        Ok(s)
    }

    fn from_raw(n_qubits: usize, batch: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || batch == 0 {
            return Err(Error::Contract("need at least one qubit and one state".into()));
        }
        let dim = 1usize
            .checked_shl(n_qubits as u32)
            .filter(|_| n_qubits < usize::BITS as usize)
            .ok_or_else(|| Error::Contract(format!("{n_qubits} qubits do not fit in memory")))?;
        if amplitudes.len() != batch * dim {
            return Err(Error::Dimension {
                expected: batch * dim,
                found: amplitudes.len(),
            });
        }
        Ok(StateBatch {
            n_qubits,
            batch,
            amplitudes,
        })
    }

    /// Rebuilds a batch from amplitudes produced by a norm-preserving
    /// kernel.
    pub(crate) fn from_kernel(n_qubits: usize, batch: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), batch << n_qubits);
        StateBatch {
            n_qubits,
            batch,
            amplitudes,
        }
    }

    /// `batch` copies of `|0...0>`.
    pub fn zero_state(n_qubits: usize, batch: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); batch * dim];
        for b in 0..batch {
            amps[b * dim] = Complex64::new(1.0, 0.0);
        }
        Self::from_raw(n_qubits, batch, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn row(&self, b: usize) -> &[Complex64] {
        let d = self.dim();
        &self.amplitudes[b * d..(b + 1) * d]
    }

    /// Largest `|‖ψ_b‖² - 1|` and the row it occurs in.
    pub fn worst_norm_deviation(&self) -> Option<(usize, f64)> {
        (0..self.batch)
            .map(|b| {
                let n: f64 = self.row(b).iter().map(|z| z.norm_sqr()).sum();
                (b, (n - 1.0).abs())
            })
            .fold(None, |acc, x| match acc {
                Some((_, d)) if d >= x.1 => acc,
                _ => Some(x),
            })
    }

    /// Largest entry-wise difference to another batch of the same shape.
    pub fn max_abs_diff(&self, other: &StateBatch) -> f64 {
        assert_eq!(self.amplitudes.len(), other.amplitudes.len(), "shape mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Encodes each feature row as the product state `⊗_i RX(x_i)|0>`.
///
/// `features` is row-major `batch x n_qubits`.
pub fn rx_encode(n_qubits: usize, features: &[f64]) -> Result<StateBatch> {
    if n_qubits == 0 || features.is_empty() || features.len() % n_qubits != 0 {
        return Err(Error::Contract(format!(
            "{} features cannot be split into rows of {n_qubits}",
            features.len()
        )));
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("features must be finite".into()));
    }
    let batch = features.len() / n_qubits;
    let dim = 1usize << n_qubits;
    let mut amps = Vec::with_capacity(batch * dim);
    for row in features.chunks(n_qubits) {
        // per wire: amplitude of |0> and of |1>
        let factors: Vec<(Complex64, Complex64)> = row
            .iter()
            .map(|&x| {
                let h = 0.5 * x;
                (Complex64::new(h.cos(), 0.0), Complex64::new(0.0, -h.sin()))
            })
            .collect();
        for j in 0..dim {
            let mut amp = Complex64::new(1.0, 0.0);
            for (w, &(zero, one)) in factors.iter().enumerate() {
                amp *= if j >> (n_qubits - 1 - w) & 1 == 0 { zero } else { one };
            }
            amps.push(amp);
        }
    }
    Ok(StateBatch::from_kernel(n_qubits, batch, amps))
}

/// `<Z_i>` per row and wire, row-major `batch x n_qubits`.
pub fn z_expectations(s: &StateBatch) -> Vec<f64> {
    let n = s.n_qubits;
    let mut out = vec![0.0; s.batch * n];
    for b in 0..s.batch {
        let z = &mut out[b * n..(b + 1) * n];
        for (j, amp) in s.row(b).iter().enumerate() {
            let p = amp.norm_sqr();
            for (w, zw) in z.iter_mut().enumerate() {
                if j >> (n - 1 - w) & 1 == 0 {
                    *zw += p;
                } else {
                    *zw -= p;
                }
            }
        }
    }
    out
}

/// Pulls a cotangent of [`z_expectations`] back to the amplitudes:
/// `C_bj = 2 ψ_bj Σ_i g_bi s_i(j)`, so that `dL = Re Σ conj(C) dψ`.
pub fn z_expectations_vjp(s: &StateBatch, grad: &[f64]) -> Result<Vec<Complex64>> {
    let n = s.n_qubits;
    if grad.len() != s.batch * n {
        return Err(Error::Dimension {
            expected: s.batch * n,
            found: grad.len(),
        });
    }
    let dim = s.dim();
    let mut out = Vec::with_capacity(s.amplitudes.len());
    for b in 0..s.batch {
        let g = &grad[b * n..(b + 1) * n];
        for j in 0..dim {
            let weight: f64 = g
                .iter()
                .enumerate()
                .map(|(w, &gw)| if j >> (n - 1 - w) & 1 == 0 { gw } else { -gw })
                .sum();
            out.push(s.amplitudes[b * dim + j] * (2.0 * weight));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_features_encode_the_zero_state() {
        let s = rx_encode(3, &[0.0; 3]).unwrap();
        assert_eq!(s, StateBatch::zero_state(3, 1).unwrap());
    }

    #[test]
    fn rx_pi_flips_with_phase() {
        let s = rx_encode(1, &[PI]).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn z_of_basis_states() {
        assert_eq!(z_expectations(&StateBatch::zero_state(3, 2).unwrap()), vec![1.0; 6]);
        let one = StateBatch::new(1, 1, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(z_expectations(&one), vec![-1.0]);
    }

    #[test]
    fn msb_convention() {
        // |01>: wire 0 is |0>, wire 1 is |1>
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[1] = Complex64::new(1.0, 0.0);
        let s = StateBatch::new(2, 1, amps).unwrap();
        assert_eq!(z_expectations(&s), vec![1.0, -1.0]);
    }

    #[test]
    fn unnormalized_rows_are_rejected() {
        let r = StateBatch::new(1, 1, vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::Domain(_))));
        let r = StateBatch::new(1, 1, vec![Complex64::new(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn ragged_features_are_rejected() {
        assert!(rx_encode(2, &[0.1, 0.2, 0.3]).is_err());
        assert!(rx_encode(2, &[0.1, f64::NAN]).is_err());
    }
}
