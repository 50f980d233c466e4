//! Trainable circuit models behind one trait, built by name through a
//! [`ModelRegistry`].
//!
//! Three strategies ship with the crate: `FullUnitary` (one generator for
//! the whole register), `Partitioned` (layers of per-group generators) and
//! `Ansatz` (a composed-gate baseline). Experiments pick one through the
//! `kind` field of a [`ModelSpec`].

mod ansatz;
mod full;
mod partitioned;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use ansatz::AnsatzModel;
pub use full::FullUnitaryModel;
pub use partitioned::PartitionedModel;

use crate::circuit::StateBatch;
use crate::error::{Error, Result};

pub const FULL_UNITARY: &str = "FullUnitary";
pub const PARTITIONED: &str = "Partitioned";
pub const ANSATZ: &str = "Ansatz";

/// How parameters are initialized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// Generators with `Normal(0, 1/d)` coordinates; ansatz angles uniform
    /// in `[0, 2π)`.
    #[default]
    Random,
    /// All parameters zero, i.e. the identity circuit.
    Zero,
}

/// Everything needed to build a model, apart from its trained parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: String,
    pub n_qubits: usize,
    #[serde(default)]
    pub init: Init,
    /// Wires per group (`Partitioned`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
    /// Number of partition layers (`Partitioned`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    /// Number of rotations (`Ansatz`); defaults to `4^n_qubits`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_params: Option<usize>,
}

impl ModelSpec {
    pub fn new(kind: &str, n_qubits: usize) -> Self {
        ModelSpec {
            kind: kind.to_string(),
            n_qubits,
            init: Init::Random,
            group_size: None,
            layers: None,
            n_params: None,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn partitioned(n_qubits: usize, group_size: usize, layers: usize) -> Self {
        ModelSpec {
            group_size: Some(group_size),
            layers: Some(layers),
            ..Self::new(PARTITIONED, n_qubits)
        }
    }

    pub fn ansatz(n_qubits: usize, n_params: usize) -> Self {
        ModelSpec {
            n_params: Some(n_params),
            ..Self::new(ANSATZ, n_qubits)
        }
    }
}

/// A parametrized map on statevectors with a reverse-mode gradient.
pub trait QuantumModel: fmt::Debug + Send + Sync {
    /// Registry name of the strategy.
    fn kind(&self) -> &'static str;

    fn n_qubits(&self) -> usize;

    fn n_params(&self) -> usize;

    fn params(&self) -> Vec<f64>;

    fn set_params(&mut self, params: &[f64]) -> Result<()>;

    fn forward(&self, input: &StateBatch) -> Result<StateBatch>;

    /// Parameter gradient of a scalar loss, given the forward `input`, its
    /// `output` and the loss cotangent of the output amplitudes (convention
    /// `dL = Re Σ conj(c) dψ`).
    fn backward(&self, input: &StateBatch, output: &StateBatch, cotangent: &[Complex64]) -> Result<Vec<f64>>;

    /// Structural description (generator layout, partition or gate list)
    /// for checkpoints.
    fn structure(&self) -> serde_json::Value;

    fn clone_box(&self) -> Box<dyn QuantumModel>;
}

impl Clone for Box<dyn QuantumModel> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Builds a model from its spec; `seed` drives random initialization.
pub type ModelFactory = fn(&ModelSpec, u64) -> Result<Box<dyn QuantumModel>>;

/// Name-indexed set of model strategies.
#[derive(Clone)]
pub struct ModelRegistry {
    factories: BTreeMap<String, ModelFactory>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with the built-in strategies.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(FULL_UNITARY, full::build);
        r.register(PARTITIONED, partitioned::build);
        r.register(ANSATZ, ansatz::build);
        r
    }

    /// Adds or replaces a strategy.
    pub fn register(&mut self, name: &str, factory: ModelFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(&self, spec: &ModelSpec, seed: u64) -> Result<Box<dyn QuantumModel>> {
        if spec.n_qubits == 0 {
            return Err(Error::Config("model needs at least one qubit".into()));
        }
        let factory = self
            .factories
            .get(&spec.kind)
            .ok_or_else(|| Error::UnknownModel(spec.kind.clone()))?;
        factory(spec, seed)
    }

    /// Rebuilds a model from a checkpoint, restoring its parameters.
    pub fn restore(&self, ckpt: &ModelCheckpoint) -> Result<Box<dyn QuantumModel>> {
        let mut model = self.build(&ckpt.spec, ckpt.seed)?;
        model.set_params(&ckpt.params)?;
        Ok(model)
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

/// Serialized model: spec, build seed, flat parameters and structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub spec: ModelSpec,
    pub seed: u64,
    pub params: Vec<f64>,
    pub structure: serde_json::Value,
}

impl ModelCheckpoint {
    pub fn capture(spec: &ModelSpec, seed: u64, model: &dyn QuantumModel) -> Self {
        ModelCheckpoint {
            spec: spec.clone(),
            seed,
            params: model.params(),
            structure: model.structure(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::rx_encode;

    #[test]
    fn defaults_are_registered() {
        let r = ModelRegistry::with_defaults();
        assert_eq!(r.names().collect::<Vec<_>>(), vec![ANSATZ, FULL_UNITARY, PARTITIONED]);
    }

    #[test]
    fn unknown_kind_is_reported() {
        let r = ModelRegistry::with_defaults();
        let err = r.build(&ModelSpec::new("Mystery", 2), 0).unwrap_err();
        assert!(matches!(err, Error::UnknownModel(name) if name == "Mystery"));
    }

    #[test]
    fn custom_strategy_can_be_registered() {
        fn tiny(spec: &ModelSpec, seed: u64) -> Result<Box<dyn QuantumModel>> {
            full::build(&ModelSpec::new(FULL_UNITARY, spec.n_qubits).with_init(Init::Zero), seed)
        }
        let mut r = ModelRegistry::empty();
        r.register("Tiny", tiny);
        let m = r.build(&ModelSpec::new("Tiny", 1), 0).unwrap();
        assert_eq!(m.params(), vec![0.0; 4]);
    }

    #[test]
    fn parameter_counts() {
        let r = ModelRegistry::with_defaults();
        for n in 1..=4 {
            assert_eq!(r.build(&ModelSpec::new(FULL_UNITARY, n), 0).unwrap().n_params(), 1 << (2 * n));
            assert_eq!(r.build(&ModelSpec::new(ANSATZ, n), 0).unwrap().n_params(), 1 << (2 * n));
        }
        let p = r.build(&ModelSpec::partitioned(8, 2, 3), 0).unwrap();
        assert_eq!(p.n_params(), 192);
    }

    #[test]
    fn checkpoint_restores_outputs() {
        let r = ModelRegistry::with_defaults();
        let input = rx_encode(2, &[0.3, -0.4]).unwrap();
        for spec in [
            ModelSpec::new(FULL_UNITARY, 2),
            ModelSpec::partitioned(2, 1, 2),
            ModelSpec::ansatz(2, 6),
        ] {
            let mut m = r.build(&spec, 9).unwrap();
            let mut p = m.params();
            p[0] += 0.25;
            m.set_params(&p).unwrap();
            let ckpt = ModelCheckpoint::capture(&spec, 9, m.as_ref());
            let text = serde_json::to_string(&ckpt).unwrap();
            let back: ModelCheckpoint = serde_json::from_str(&text).unwrap();
            let restored = r.restore(&back).unwrap();
            assert_eq!(restored.forward(&input).unwrap(), m.forward(&input).unwrap());
        }
    }

    #[test]
    fn zero_init_is_identity() {
        let r = ModelRegistry::with_defaults();
        let input = rx_encode(3, &[0.3, -0.4, 1.2]).unwrap();
        for spec in [
            ModelSpec::new(FULL_UNITARY, 3),
            ModelSpec::partitioned(3, 1, 2),
        ] {
            let m = r.build(&spec.with_init(Init::Zero), 1).unwrap();
            let out = m.forward(&input).unwrap();
            assert!(out.max_abs_diff(&input) < 1e-15);
        }
    }
}
