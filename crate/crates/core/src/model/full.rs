use num_complex::Complex64;

use super::{Init, ModelSpec, QuantumModel, FULL_UNITARY};
use crate::circuit::kernels::{group_operator_cotangent, GroupLayout};
use crate::circuit::{apply_full, StateBatch};
use crate::error::{ensure_dim, Error, Result};
use crate::liegroup::{assemble, check_len, param_grad, to_unitary, SkewHermitianParams};
use crate::linalg::matexp_vjp;
use crate::seed::rng_for;

/// One generator for the whole register: `U = exp(assemble(θ))`, with
/// `4^n` real parameters.
#[derive(Clone, Debug)]
pub struct FullUnitaryModel {
    n_qubits: usize,
    params: SkewHermitianParams,
}

pub(super) fn build(spec: &ModelSpec, seed: u64) -> Result<Box<dyn QuantumModel>> {
    if spec.n_qubits > 14 {
        return Err(Error::Config(format!("{} qubits exceed the dense-generator limit of 14", spec.n_qubits)));
    }
    let dim = 1 << spec.n_qubits;
    let params = match spec.init {
        Init::Random => SkewHermitianParams::random(dim, &mut rng_for(seed, "full-unitary")),
        Init::Zero => SkewHermitianParams::zeros(dim),
    };
    Ok(Box::new(FullUnitaryModel::new(spec.n_qubits, params)?))
}

impl FullUnitaryModel {
    pub fn new(n_qubits: usize, params: SkewHermitianParams) -> Result<Self> {
        ensure_dim(1 << n_qubits, params.dim())?;
        Ok(FullUnitaryModel { n_qubits, params })
    }

    pub fn generator(&self) -> &SkewHermitianParams {
        &self.params
    }

    /// Parameter gradient from the cotangent of the full operator.
    pub fn operator_grad(&self, operator_cotangent: &crate::linalg::ComplexMatrix) -> Result<Vec<f64>> {
        let abar = matexp_vjp(&assemble(&self.params), operator_cotangent)?;
        Ok(param_grad(&abar))
    }
}

impl QuantumModel for FullUnitaryModel {
    fn kind(&self) -> &'static str {
        FULL_UNITARY
    }

    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn n_params(&self) -> usize {
        self.params.theta().len()
    }

    fn params(&self) -> Vec<f64> {
        self.params.theta().to_vec()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_len(self.params.dim(), params)?;
        self.params.theta_mut().copy_from_slice(params);
        Ok(())
    }

    fn forward(&self, input: &StateBatch) -> Result<StateBatch> {
        apply_full(input, &to_unitary(&self.params)?)
    }

    fn backward(&self, input: &StateBatch, _output: &StateBatch, cotangent: &[Complex64]) -> Result<Vec<f64>> {
        ensure_dim(input.amplitudes().len(), cotangent.len())?;
        let wires: Vec<usize> = (0..self.n_qubits).collect();
        let layout = GroupLayout::new(self.n_qubits, &wires)?;
        let gbar = group_operator_cotangent(input.amplitudes(), cotangent, input.dim(), &layout);
        self.operator_grad(&gbar)
    }

    fn structure(&self) -> serde_json::Value {
        serde_json::json!({ "dim": self.params.dim() })
    }

    fn clone_box(&self) -> Box<dyn QuantumModel> {
        Box::new(self.clone())
    }
}
