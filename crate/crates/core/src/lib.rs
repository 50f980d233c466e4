//! Ansatz-free training of quantum circuits as elements of the unitary
//! group `U(2^n)`.
//!
//! A circuit on `n` wires is parametrized by a real vector of `4^n`
//! coordinates on the Lie algebra of skew-Hermitian matrices and mapped to
//! a unitary with the matrix exponential. Gradients flow back through a
//! batched statevector simulator, the exponential's adjoint derivative and
//! the coordinate map. Partitioned (per-group) unitaries and a composed-gate
//! ansatz are available as alternative [`model`] strategies.

pub mod bench;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod liegroup;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod quanv;
pub mod seed;

pub use error::{Error, Result};

/// Environment variable capping internal parallelism.
pub const THREADS_ENV: &str = "UNITARY_FORGE_THREADS";

/// Worker threads used by numerical kernels.
///
/// All kernels currently run on the calling thread, so this is 1 whatever
/// the cap says; the value is recorded in reports next to timings.
pub fn worker_threads() -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1);
    cap.min(1)
}
