//! Dense complex linear algebra: matrices, the matrix exponential and its
//! adjoint derivative.

mod expm;
mod lu;
mod matrix;
mod unitary;

pub use expm::{matexp, matexp_frechet, matexp_vjp, unitarity_error};
pub use lu::{lu_factor, LuFactors};
pub use matrix::{gemm, ComplexMatrix, MatMut, MatRef};
pub use unitary::{random_unitary, UnitaryMatrix, UNITARITY_TOLERANCE};

pub use num_complex::Complex64;
