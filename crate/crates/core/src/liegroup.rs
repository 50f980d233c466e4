//! Real-vector coordinates on the Lie algebra u(d) of skew-Hermitian
//! matrices.
//!
//! A `d x d` skew-Hermitian matrix has `d^2` real degrees of freedom: `d`
//! imaginary diagonal entries and `d(d-1)/2` complex strictly-upper
//! entries. Coordinates are laid out row by row; each row contributes its
//! diagonal entry followed by the (real, imaginary) pairs to the right of
//! it. For `d = 4` that reads
//!
//! ```text
//! [ t1 i        t2 + t3 i    t4 + t5 i    t6 + t7 i   ]
//! [ -t2 + t3 i  t8 i         t9 + t10 i   t11 + t12 i ]
//! [ -t4 + t5 i  -t9 + t10 i  t13 i        t14 + t15 i ]
//! [ -t6 + t7 i  -t11 + t12 i -t14 + t15 i t16 i       ]
//! ```

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{matexp, ComplexMatrix, UnitaryMatrix};

/// Largest `|X + X^H|` entry accepted by [`disassemble`].
pub const SKEW_TOLERANCE: f64 = 1e-10;

/// Coordinates of a skew-Hermitian `dim x dim` matrix; `theta.len() == dim^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SkewHermitianParams {
    dim: usize,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    dim: usize,
    theta: Vec<f64>,
}

impl TryFrom<RawParams> for SkewHermitianParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SkewHermitianParams::new(raw.dim, raw.theta)
    }
}

impl From<SkewHermitianParams> for RawParams {
    fn from(p: SkewHermitianParams) -> Self {
        RawParams {
            dim: p.dim,
            theta: p.theta,
        }
    }
}

impl SkewHermitianParams {
    pub fn new(dim: usize, theta: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("dimension must be positive".into()));
        }
        if theta.len() != dim * dim {
            return Err(Error::Contract(format!(
                "a {dim}x{dim} skew-Hermitian matrix needs {} parameters, got {}",
                dim * dim,
                theta.len()
            )));
        }
        Ok(SkewHermitianParams { dim, theta })
    }

    pub fn zeros(dim: usize) -> Self {
        SkewHermitianParams {
            dim,
            theta: vec![0.0; dim * dim],
        }
    }

    /// Independent `Normal(0, 1/dim)` coordinates, which keeps the norm of
    /// the assembled generator roughly independent of `dim`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, 1.0 / dim as f64).expect("positive std");
        SkewHermitianParams {
            dim,
            theta: (0..dim * dim).map(|_| normal.sample(rng)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn into_theta(self) -> Vec<f64> {
        self.theta
    }

    /// Number of real parameters for a `dim x dim` generator.
    pub const fn count(dim: usize) -> usize {
        dim * dim
    }
}

/// Walks the coordinate layout, calling `f(i, i, k)` for the diagonal
/// coordinate `k` of row `i` and `f(i, j, k)` for the pair `(k, k+1)`
/// encoding entry `(i, j)`, `i < j`.
fn for_each_slot(dim: usize, mut f: impl FnMut(usize, usize, usize)) {
    let mut k = 0;
    for i in 0..dim {
        f(i, i, k);
        k += 1;
        for j in i + 1..dim {
            f(i, j, k);
            k += 2;
        }
    }
}

/// Skew-Hermitian matrix with the given coordinates.
pub fn assemble(p: &SkewHermitianParams) -> ComplexMatrix {
    let d = p.dim;
    let t = &p.theta;
    let mut x = ComplexMatrix::zeros(d);
    for_each_slot(d, |i, j, k| {
        if i == j {
            x[(i, i)] = Complex64::new(0.0, t[k]);
        } else {
            x[(i, j)] = Complex64::new(t[k], t[k + 1]);
            x[(j, i)] = Complex64::new(-t[k], t[k + 1]);
        }
    });
    x
}

/// Coordinates of a skew-Hermitian matrix; inverse of [`assemble`].
pub fn disassemble(x: &ComplexMatrix) -> Result<SkewHermitianParams> {
    let defect = x.skew_hermitian_defect();
    if defect > SKEW_TOLERANCE {
        return Err(Error::Domain(format!(
            "matrix is not skew-Hermitian: max |X + X^H| = {defect:.3e}"
        )));
    }
    let d = x.dim();
    let mut theta = vec![0.0; d * d];
    for_each_slot(d, |i, j, k| {
        if i == j {
            theta[k] = x[(i, i)].im;
        } else {
            theta[k] = x[(i, j)].re;
            theta[k + 1] = x[(i, j)].im;
        }
    });
    Ok(SkewHermitianParams { dim: d, theta })
}

/// Pulls a matrix cotangent back to coordinates:
/// `g_k = Re tr(Ā^H dX/dθ_k)`.
pub fn param_grad(cotangent: &ComplexMatrix) -> Vec<f64> {
    let d = cotangent.dim();
    let a = cotangent;
    let mut g = vec![0.0; d * d];
    for_each_slot(d, |i, j, k| {
        if i == j {
            g[k] = a[(i, i)].im;
        } else {
            g[k] = a[(i, j)].re - a[(j, i)].re;
            g[k + 1] = a[(i, j)].im + a[(j, i)].im;
        }
    });
    g
}

/// `exp(assemble(p))`.
pub fn to_unitary(p: &SkewHermitianParams) -> Result<UnitaryMatrix> {
    UnitaryMatrix::new(matexp(&assemble(p))?)
}

/// Checks a coordinate vector against an expected dimension.
pub(crate) fn check_len(dim: usize, theta: &[f64]) -> Result<()> {
    ensure_dim(dim * dim, theta.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_layout() {
        let x = assemble(&SkewHermitianParams::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!(x.as_slice(), &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let x = assemble(&SkewHermitianParams::new(2, vec![0.0, 1.0, 2.0, 0.0]).unwrap());
        assert_eq!(x.as_slice(), &[c(0.0, 0.0), c(1.0, 2.0), c(-1.0, 2.0), c(0.0, 0.0)]);
    }

    #[test]
    fn four_by_four_layout_matches_reference_matrix() {
        // theta_k = k, 1-based, so every entry names its own coordinate
        let p = SkewHermitianParams::new(4, (1..=16).map(f64::from).collect()).unwrap();
        let x = assemble(&p);
        #[rustfmt::skip]
        let expected = [
            c(0.0, 1.0),   c(2.0, 3.0),    c(4.0, 5.0),    c(6.0, 7.0),
            c(-2.0, 3.0),  c(0.0, 8.0),    c(9.0, 10.0),   c(11.0, 12.0),
            c(-4.0, 5.0),  c(-9.0, 10.0),  c(0.0, 13.0),   c(14.0, 15.0),
            c(-6.0, 7.0),  c(-11.0, 12.0), c(-14.0, 15.0), c(0.0, 16.0),
        ];
        assert_eq!(x.as_slice(), &expected);
    }

    #[test]
    fn zeros_assemble_to_zero() {
        assert_eq!(assemble(&SkewHermitianParams::zeros(3)), ComplexMatrix::zeros(3));
        assert_eq!(disassemble(&ComplexMatrix::zeros(3)).unwrap(), SkewHermitianParams::zeros(3));
    }

    #[test]
    fn diagonal_read_off() {
        let x = ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, -1.0)]);
        assert_eq!(disassemble(&x).unwrap().theta(), &[1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(matches!(SkewHermitianParams::new(2, vec![0.0; 3]), Err(Error::Contract(_))));
        let bad: std::result::Result<SkewHermitianParams, _> =
            serde_json::from_str(r#"{"dim": 3, "theta": [1.0]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn non_skew_input_is_rejected() {
        assert!(matches!(disassemble(&ComplexMatrix::identity(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn param_grad_examples() {
        assert_eq!(param_grad(&ComplexMatrix::zeros(3)), vec![0.0; 9]);
        let a = ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(param_grad(&a), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_generator_gives_identity() {
        assert_eq!(to_unitary(&SkewHermitianParams::zeros(4)).unwrap().matrix(), &ComplexMatrix::identity(4));
    }

    #[test]
    fn real_generator_gives_rotation() {
        let t = 0.7;
        let u = to_unitary(&SkewHermitianParams::new(2, vec![0.0, t, 0.0, 0.0]).unwrap()).unwrap();
        let expected =
            ComplexMatrix::from_vec(2, vec![c(t.cos(), 0.0), c(t.sin(), 0.0), c(-t.sin(), 0.0), c(t.cos(), 0.0)])
                .unwrap();
        assert!(u.matrix().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn five_qubits_use_1024_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = SkewHermitianParams::random(32, &mut rng);
        assert_eq!(p.theta().len(), 1024);
        assert_eq!(SkewHermitianParams::count(1 << 5), 1 << 10);
    }

    #[test]
    fn json_round_trip() {
        let p = SkewHermitianParams::new(2, vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"dim":2,"theta":[0.5,-1.0,2.0,0.25]}"#);
        assert_eq!(serde_json::from_str::<SkewHermitianParams>(&text).unwrap(), p);
    }
}
