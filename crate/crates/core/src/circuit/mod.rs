//! Batched statevector simulation.
//!
//! Wire 0 is the most significant bit of a basis-state index. Every
//! operation takes a [`StateBatch`] by reference and returns a new one.

mod gates;
pub(crate) mod kernels;
mod partition;
mod state;

pub use gates::{apply_gate, random_layer, run_ansatz, AnsatzCircuit, GateKind, GateOp, RANDOM_LAYER_CNOT_PROBABILITY};
pub use partition::{PartitionLayer, PartitionedUnitary, WirePartition};
pub use state::{rx_encode, z_expectations, z_expectations_vjp, StateBatch, NORM_TOLERANCE};

use kernels::{apply_group_matrix, GroupLayout};

use crate::error::{Error, Result};
use crate::liegroup::to_unitary;
use crate::linalg::UnitaryMatrix;

/// Multiplies every row by `u`.
pub fn apply_full(s: &StateBatch, u: &UnitaryMatrix) -> Result<StateBatch> {
    if u.dim() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            found: u.dim(),
        });
    }
    let wires: Vec<usize> = (0..s.n_qubits()).collect();
    apply_group(s, &wires, u)
}

/// Applies `u_small` to `wires`, the first listed wire being the most
/// significant qubit of `u_small`'s basis.
pub fn apply_group(s: &StateBatch, wires: &[usize], u_small: &UnitaryMatrix) -> Result<StateBatch> {
    let layout = GroupLayout::new(s.n_qubits(), wires)?;
    if u_small.dim() != layout.group_dim() {
        return Err(Error::Dimension {
            expected: layout.group_dim(),
            found: u_small.dim(),
        });
    }
    let amps = apply_group_matrix(s.amplitudes(), s.dim(), &layout, u_small.matrix());
    Ok(StateBatch::from_kernel(s.n_qubits(), s.batch(), amps))
}

/// Applies every layer in order; within a layer, each group's
/// `exp(assemble(params))` acts on its wires.
pub fn apply_partitioned(s: &StateBatch, pu: &PartitionedUnitary) -> Result<StateBatch> {
    if pu.n_qubits != s.n_qubits() {
        return Err(Error::Dimension {
            expected: s.n_qubits(),
            found: pu.n_qubits,
        });
    }
    pu.validate()?;
    let mut state = s.clone();
    for layer in &pu.layers {
        for (wires, params) in layer.partition.groups.iter().zip(&layer.params) {
            state = apply_group(&state, wires, &to_unitary(params)?)?;
        }
    }
    Ok(state)
}
