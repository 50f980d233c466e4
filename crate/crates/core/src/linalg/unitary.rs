use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::expm::{matexp, unitarity_error};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Largest tolerated entry of `U^H U - I`.
pub const UNITARITY_TOLERANCE: f64 = 1e-6;

/// A [`ComplexMatrix`] verified to be unitary at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(inner: ComplexMatrix) -> Result<Self> {
        let err = unitarity_error(&inner);
        if err <= UNITARITY_TOLERANCE {
            Ok(UnitaryMatrix(inner))
        } else {
            Err(Error::Domain(format!(
                "matrix is not unitary: max |U^H U - I| = {err:.3e}"
            )))
        }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    /// The inverse, which for a unitary is the conjugate transpose.
    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn compose(&self, rhs: &UnitaryMatrix) -> Self {
        UnitaryMatrix(self.0.matmul(&rhs.0))
    }

    pub fn kron(&self, rhs: &UnitaryMatrix) -> Self {
        UnitaryMatrix(self.0.kron(&rhs.0))
    }
}

impl TryFrom<ComplexMatrix> for UnitaryMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        UnitaryMatrix::new(m)
    }
}

impl From<UnitaryMatrix> for ComplexMatrix {
    fn from(u: UnitaryMatrix) -> Self {
        u.0
    }
}

impl AsRef<ComplexMatrix> for UnitaryMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Random unitary: exponential of `X - X^H` for a standard complex
/// Gaussian `X`. Deterministic in `seed`.
pub fn random_unitary(dim: usize, seed: u64) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::Contract("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = ComplexMatrix::from_fn(dim, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let skew = &x - &x.adjoint();
    UnitaryMatrix::new(matexp(&skew)?)
}
