use num_complex::Complex64;

use super::{Init, ModelSpec, QuantumModel, ANSATZ};
use crate::circuit::{random_layer, run_ansatz, AnsatzCircuit, StateBatch};
use crate::error::{ensure_dim, Error, Result};
use crate::seed::derive_seed;

/// Composed-gate baseline; parameters are the rotation angles.
#[derive(Clone, Debug)]
pub struct AnsatzModel {
    n_qubits: usize,
    circuit: AnsatzCircuit,
}

pub(super) fn build(spec: &ModelSpec, seed: u64) -> Result<Box<dyn QuantumModel>> {
    if spec.n_qubits > 16 {
        return Err(Error::Config(format!("{} qubits exceed the ansatz limit of 16", spec.n_qubits)));
    }
    let n_params = spec.n_params.unwrap_or(1 << (2 * spec.n_qubits));
    let mut circuit = random_layer(spec.n_qubits, n_params, derive_seed(seed, "random-layer"))?;
    if spec.init == Init::Zero {
        circuit.set_angles(&vec![0.0; n_params])?;
    }
    Ok(Box::new(AnsatzModel::new(spec.n_qubits, circuit)?))
}

impl AnsatzModel {
    pub fn new(n_qubits: usize, circuit: AnsatzCircuit) -> Result<Self> {
        circuit.validate(n_qubits)?;
        Ok(AnsatzModel { n_qubits, circuit })
    }

    pub fn circuit(&self) -> &AnsatzCircuit {
        &self.circuit
    }
}

impl QuantumModel for AnsatzModel {
    fn kind(&self) -> &'static str {
        ANSATZ
    }

    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    fn params(&self) -> Vec<f64> {
        self.circuit.angles()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.circuit.set_angles(params)
    }

    fn forward(&self, input: &StateBatch) -> Result<StateBatch> {
        run_ansatz(input, &self.circuit)
    }

    fn backward(&self, input: &StateBatch, output: &StateBatch, cotangent: &[Complex64]) -> Result<Vec<f64>> {
        ensure_dim(input.amplitudes().len(), cotangent.len())?;
        ensure_dim(input.amplitudes().len(), output.amplitudes().len())?;
        Ok(self.circuit.backward(self.n_qubits, output.amplitudes(), cotangent))
    }

    fn structure(&self) -> serde_json::Value {
        serde_json::to_value(&self.circuit).expect("circuit serializes")
    }

    fn clone_box(&self) -> Box<dyn QuantumModel> {
        Box::new(self.clone())
    }
}
