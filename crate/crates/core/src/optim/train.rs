use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::mse_loss;
use crate::circuit::{rx_encode, z_expectations, z_expectations_vjp};
use crate::error::{Error, Result};
use crate::model::{ModelCheckpoint, ModelRegistry, ModelSpec, QuantumModel, FULL_UNITARY};
use crate::seed::{derive_seed, rng_for};

/// Optimizer and loop settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub model_kind: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            model_kind: FULL_UNITARY.to_string(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("train config: {what}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Identity-learning data: features uniform in `[-π/2, π/2]^n`, targets the
/// decoded outputs of the bare encoding, `cos(features)`.
///
/// Targets are computed by actually decoding the encoded states rather than
/// calling `cos`, so the identity circuit fits them with an exactly zero
/// residual and θ = 0 is an exact fixed point of training.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityTask {
    pub n_qubits: usize,
    pub features: Vec<f64>,
    pub targets: Vec<f64>,
}

impl IdentityTask {
    pub fn generate(n_qubits: usize, size: usize, seed: u64) -> Result<Self> {
        if n_qubits == 0 || size == 0 {
            return Err(Error::Config("identity task needs qubits and data points".into()));
        }
        let mut rng = rng_for(seed, "identity-data");
        let features: Vec<f64> = (0..n_qubits * size)
            .map(|_| rng.random_range(-FRAC_PI_2..=FRAC_PI_2))
            .collect();
        let targets = z_expectations(&rx_encode(n_qubits, &features)?);
        Ok(IdentityTask {
            n_qubits,
            features,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len() / self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    fn rows(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_qubits;
        let mut f = Vec::with_capacity(idx.len() * n);
        let mut t = Vec::with_capacity(idx.len() * n);
        for &i in idx {
            f.extend_from_slice(&self.features[i * n..(i + 1) * n]);
            t.extend_from_slice(&self.targets[i * n..(i + 1) * n]);
        }
        (f, t)
    }
}

/// MSE of the decoded circuit outputs and its gradient with respect to the
/// model parameters: encode, apply, decode forward; then decode-VJP and the
/// model's backward pass.
pub fn loss_and_grad(model: &dyn QuantumModel, features: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    let input = rx_encode(model.n_qubits(), features)?;
    let output = model.forward(&input)?;
    let pred = z_expectations(&output);
    let (loss, dpred) = mse_loss(&pred, targets)?;
    let cot = z_expectations_vjp(&output, &dpred)?;
    let grads = model.backward(&input, &output, &cot)?;
    Ok((loss, grads))
}

/// Loss without gradient.
pub fn evaluate(model: &dyn QuantumModel, features: &[f64], targets: &[f64]) -> Result<f64> {
    let input = rx_encode(model.n_qubits(), features)?;
    let pred = z_expectations(&model.forward(&input)?);
    Ok(mse_loss(&pred, targets)?.0)
}

/// Per-epoch outcome of [`train_model`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    /// Mean per-sample loss seen during each timed epoch.
    pub loss_curve: Vec<f64>,
    /// Wall-clock seconds of each timed epoch.
    pub epoch_times: Vec<f64>,
    pub steps: u64,
}

/// Runs `warmup_epochs` untimed epochs followed by `cfg.epochs` timed ones,
/// with one Adam step per minibatch. Batches are drawn from a seeded
/// per-epoch shuffle.
pub fn train_model(model: &mut dyn QuantumModel, task: &IdentityTask, cfg: &TrainConfig, warmup_epochs: usize) -> Result<TrainLog> {
    cfg.validate()?;
    if task.n_qubits != model.n_qubits() {
        return Err(Error::Dimension {
            expected: model.n_qubits(),
            found: task.n_qubits,
        });
    }
    let adam = cfg.adam();
    let mut state = AdamState::new(model.n_params());
    let mut params = model.params();
    let mut order: Vec<usize> = (0..task.len()).collect();
    let mut shuffle = rng_for(cfg.seed, "shuffle");
    let mut log = TrainLog::default();

    for epoch in 0..warmup_epochs + cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let (f, t) = task.rows(idx);
            let (loss, grads) = loss_and_grad(model, &f, &t)?;
            total += loss * idx.len() as f64;
            adam_step(&mut params, &grads, &mut state, &adam)?;
            model.set_params(&params)?;
        }
        let elapsed = start.elapsed().as_secs_f64();
        if epoch >= warmup_epochs {
            log.loss_curve.push(total / task.len() as f64);
            log.epoch_times.push(elapsed);
        }
    }
    log.steps = state.step_count;
    Ok(log)
}

/// Result of an identity-learning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model_kind: String,
    pub n_qubits: usize,
    pub n_params: usize,
    pub dataset_size: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub steps: u64,
    pub loss_curve: Vec<f64>,
    /// Loss on the whole dataset after the last update.
    pub final_loss: f64,
    pub epoch_times: Vec<f64>,
    pub threads: usize,
    pub final_params: ModelCheckpoint,
}

impl TrainReport {
    /// `epoch,loss,seconds` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "loss", "seconds"])?;
        for (e, (l, s)) in self.loss_curve.iter().zip(&self.epoch_times).enumerate() {
            w.write_record([e.to_string(), format!("{l:e}"), format!("{s:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Identity learning with the default model of `cfg.model_kind`.
pub fn train_identity(cfg: &TrainConfig, n_qubits: usize, dataset_size: usize) -> Result<TrainReport> {
    let spec = ModelSpec::new(&cfg.model_kind, n_qubits);
    train_identity_with(cfg, &spec, dataset_size, &ModelRegistry::with_defaults())
}

/// Identity learning with an explicit model spec and registry. The spec's
/// `kind` wins over `cfg.model_kind`.
pub fn train_identity_with(cfg: &TrainConfig, spec: &ModelSpec, dataset_size: usize, registry: &ModelRegistry) -> Result<TrainReport> {
    cfg.validate()?;
    let model_seed = derive_seed(cfg.seed, "model");
    let mut model = registry.build(spec, model_seed)?;
    let task = IdentityTask::generate(spec.n_qubits, dataset_size, derive_seed(cfg.seed, "data"))?;
    let log = train_model(model.as_mut(), &task, cfg, 0)?;
    let final_loss = evaluate(model.as_ref(), &task.features, &task.targets)?;
    Ok(TrainReport {
        model_kind: spec.kind.clone(),
        n_qubits: spec.n_qubits,
        n_params: model.n_params(),
        dataset_size,
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        steps: log.steps,
        loss_curve: log.loss_curve,
        final_loss,
        epoch_times: log.epoch_times,
        threads: crate::worker_threads(),
        final_params: ModelCheckpoint::capture(spec, model_seed, model.as_ref()),
    })
}
