use num_complex::Complex64;

use super::{Init, ModelSpec, QuantumModel, PARTITIONED};
use crate::circuit::kernels::{apply_group_matrix, group_operator_cotangent, GroupLayout};
use crate::circuit::{apply_partitioned, PartitionedUnitary, StateBatch};
use crate::error::{ensure_dim, Error, Result};
use crate::liegroup::{assemble, param_grad, to_unitary};
use crate::linalg::matexp_vjp;
use crate::seed::rng_for;

/// Layers of per-group generators (see [`PartitionedUnitary`]).
#[derive(Clone, Debug)]
pub struct PartitionedModel {
    unitary: PartitionedUnitary,
}

pub(super) fn build(spec: &ModelSpec, seed: u64) -> Result<Box<dyn QuantumModel>> {
    let group_size = spec
        .group_size
        .ok_or_else(|| Error::Config("Partitioned model needs `group_size`".into()))?;
    let layers = spec
        .layers
        .ok_or_else(|| Error::Config("Partitioned model needs `layers`".into()))?;
    let mut unitary = PartitionedUnitary::brickwork(spec.n_qubits, group_size, layers, &mut rng_for(seed, "partitioned"))?;
    if spec.init == Init::Zero {
        let zeros = vec![0.0; unitary.n_params()];
        unitary.set_flat_params(&zeros)?;
    }
    Ok(Box::new(PartitionedModel { unitary }))
}

impl PartitionedModel {
    pub fn new(unitary: PartitionedUnitary) -> Result<Self> {
        unitary.validate()?;
        Ok(PartitionedModel { unitary })
    }

    pub fn unitary(&self) -> &PartitionedUnitary {
        &self.unitary
    }
}

impl QuantumModel for PartitionedModel {
    fn kind(&self) -> &'static str {
        PARTITIONED
    }

    fn n_qubits(&self) -> usize {
        self.unitary.n_qubits
    }

    fn n_params(&self) -> usize {
        self.unitary.n_params()
    }

    fn params(&self) -> Vec<f64> {
        self.unitary.flat_params()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.unitary.set_flat_params(params)
    }

    fn forward(&self, input: &StateBatch) -> Result<StateBatch> {
        apply_partitioned(input, &self.unitary)
    }

    fn backward(&self, input: &StateBatch, _output: &StateBatch, cotangent: &[Complex64]) -> Result<Vec<f64>> {
        ensure_dim(input.amplitudes().len(), cotangent.len())?;
        let n = self.unitary.n_qubits;
        let dim = input.dim();

        // replay the forward pass, keeping the input of every group
        let mut steps = Vec::new();
        let mut state = input.amplitudes().to_vec();
        for layer in &self.unitary.layers {
            for (wires, params) in layer.partition.groups.iter().zip(&layer.params) {
                let layout = GroupLayout::new(n, wires)?;
                let u = to_unitary(params)?;
                let next = apply_group_matrix(&state, dim, &layout, u.matrix());
                steps.push((layout, u, params, std::mem::replace(&mut state, next)));
            }
        }

        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(steps.len());
        let mut cot = cotangent.to_vec();
        for (layout, u, params, before) in steps.iter().rev() {
            let gbar = group_operator_cotangent(before, &cot, dim, layout);
            grads.push(param_grad(&matexp_vjp(&assemble(params), &gbar)?));
            cot = apply_group_matrix(&cot, dim, layout, &u.matrix().adjoint());
        }
        Ok(grads.into_iter().rev().flatten().collect())
    }

    fn structure(&self) -> serde_json::Value {
        serde_json::to_value(&self.unitary).expect("partitioned unitary serializes")
    }

    fn clone_box(&self) -> Box<dyn QuantumModel> {
        Box::new(self.clone())
    }
}
