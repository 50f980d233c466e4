use std::fs::File;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::image::{read_csv_images, synthetic_bright_halves, CsvImageFormat, LabeledImages};
use super::layer::{backward, forward_with_tape, quanv_forward, FeatureMaps, QuanvShape, QuanvSpec};
use crate::error::{Error, Result};
use crate::model::Init;
use crate::optim::{adam_step, AdamState, TrainConfig};
use crate::seed::{derive_seed, rng_for};

/// Linear map from flattened feature maps to class logits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub n_features: usize,
    pub n_classes: usize,
    /// Row-major `n_classes x n_features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearHead {
    /// All-zero head: uniform class probabilities.
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        LinearHead {
            n_features,
            n_classes,
            weights: vec![0.0; n_features * n_classes],
            bias: vec![0.0; n_classes],
        }
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn logits(&self, features: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(features.len() / self.n_features * self.n_classes);
        for f in features.chunks(self.n_features) {
            for c in 0..self.n_classes {
                let w = &self.weights[c * self.n_features..(c + 1) * self.n_features];
                out.push(self.bias[c] + w.iter().zip(f).map(|(a, b)| a * b).sum::<f64>());
            }
        }
        out
    }

    /// Gradients `(d weights ++ d bias, d features)` from logit cotangents.
    fn backward(&self, features: &[f64], dlogits: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nf, nc) = (self.n_features, self.n_classes);
        let mut dparams = vec![0.0; self.n_params()];
        let mut dfeat = vec![0.0; features.len()];
        for (b, f) in features.chunks(nf).enumerate() {
            for c in 0..nc {
                let g = dlogits[b * nc + c];
                for k in 0..nf {
                    dparams[c * nf + k] += g * f[k];
                    dfeat[b * nf + k] += g * self.weights[c * nf + k];
                }
                dparams[nc * nf + c] += g;
            }
        }
        (dparams, dfeat)
    }

    fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().chain(&self.bias).copied()
    }

    fn set_params(&mut self, flat: &[f64]) {
        let (w, b) = flat.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }
}

/// Mean softmax cross-entropy over rows and its logit gradient.
pub fn softmax_cross_entropy(logits: &[f64], labels: &[usize], n_classes: usize) -> Result<(f64, Vec<f64>)> {
    if logits.len() != labels.len() * n_classes || labels.is_empty() {
        return Err(Error::Dimension {
            expected: labels.len() * n_classes,
            found: logits.len(),
        });
    }
    let scale = 1.0 / labels.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (row, &y) in logits.chunks(n_classes).zip(labels) {
        if y >= n_classes {
            return Err(Error::Contract(format!("label {y} with {n_classes} classes")));
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|z| (z - max).exp()).sum();
        loss += scale * (max + sum.ln() - row[y]);
        for (c, z) in row.iter().enumerate() {
            let p = (z - max).exp() / sum;
            grad.push(scale * (p - if c == y { 1.0 } else { 0.0 }));
        }
    }
    Ok((loss, grad))
}

/// Index of the largest logit per row; ties go to the lower class.
fn predictions(logits: &[f64], n_classes: usize) -> Vec<usize> {
    logits
        .chunks(n_classes)
        .map(|row| (0..n_classes).fold(0, |best, c| if row[c] > row[best] { c } else { best }))
        .collect()
}

/// Quanvolutional layer plus linear-softmax head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuanvClassifier {
    pub layer: QuanvSpec,
    pub head: LinearHead,
}

impl QuanvClassifier {
    /// Zero head sized for `height x width` inputs.
    pub fn new(layer: QuanvSpec, height: usize, width: usize, n_classes: usize) -> Result<Self> {
        let s = &layer.shape;
        let oh = super::image::output_extent(height, s.kernel, s.stride)?;
        let ow = super::image::output_extent(width, s.kernel, s.stride)?;
        let head = LinearHead::zeros(s.out_channels * oh * ow, n_classes);
        Ok(QuanvClassifier { layer, head })
    }

    pub fn n_params(&self) -> usize {
        self.layer.n_params() + self.head.n_params()
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.layer.flat_params();
        p.extend(self.head.params());
        p
    }

    fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        let (q, h) = flat.split_at(self.layer.n_params());
        self.layer.set_flat_params(q)?;
        self.head.set_params(h);
        Ok(())
    }

    fn check_features(&self, maps: &FeatureMaps) -> Result<()> {
        if maps.features_per_image() != self.head.n_features {
            return Err(Error::Dimension {
                expected: self.head.n_features,
                found: maps.features_per_image(),
            });
        }
        Ok(())
    }

    /// Fraction of correctly classified images.
    pub fn accuracy(&self, data: &LabeledImages) -> Result<f64> {
        let maps = quanv_forward(&data.images, &self.layer)?;
        self.check_features(&maps)?;
        let pred = predictions(&self.head.logits(&maps.values), self.head.n_classes);
        let hits = pred.iter().zip(&data.labels).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / data.len() as f64)
    }

    /// Mean cross-entropy on `data` and its gradient over all parameters
    /// (layer first, then head weights and bias).
    pub fn loss_and_grad(&self, data: &LabeledImages) -> Result<(f64, Vec<f64>)> {
        let (maps, tape) = forward_with_tape(&data.images, &self.layer)?;
        self.check_features(&maps)?;
        let logits = self.head.logits(&maps.values);
        let (loss, dlogits) = softmax_cross_entropy(&logits, &data.labels, self.head.n_classes)?;
        let (dhead, dfeat) = self.head.backward(&maps.values, &dlogits);
        let mut grad = backward(&self.layer, &tape, &maps, &dfeat)?;
        grad.extend(dhead);
        Ok((loss, grad))
    }
}

/// Outcome of [`train_quanv_demo`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuanvReport {
    pub n_circuits: usize,
    pub n_qubits: usize,
    pub n_params: usize,
    pub dataset_size: usize,
    pub n_classes: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub untrained_accuracy: f64,
    /// Training-set accuracy after each epoch.
    pub accuracy_curve: Vec<f64>,
    /// Mean cross-entropy seen during each epoch.
    pub loss_curve: Vec<f64>,
    pub final_accuracy: f64,
    pub epoch_times: Vec<f64>,
    pub threads: usize,
}

/// Trains the layer's circuits and a zero-initialized linear head jointly
/// with Adam on minibatches of `data`.
pub fn train_quanv_demo(data: &LabeledImages, layer: QuanvSpec, cfg: &TrainConfig) -> Result<(QuanvReport, QuanvClassifier)> {
    cfg.validate()?;
    let imgs = &data.images;
    let mut model = QuanvClassifier::new(layer, imgs.height(), imgs.width(), data.n_classes)?;
    let untrained_accuracy = model.accuracy(data)?;

    let adam = cfg.adam();
    let mut state = AdamState::new(model.n_params());
    let mut params = model.params();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle = rng_for(cfg.seed, "quanv-shuffle");
    let (mut accuracy_curve, mut loss_curve, mut epoch_times) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let batch = LabeledImages {
                images: imgs.select(idx)?,
                labels: idx.iter().map(|&i| data.labels[i]).collect(),
                n_classes: data.n_classes,
            };
            let (loss, grad) = model.loss_and_grad(&batch)?;
            total += loss * idx.len() as f64;
            adam_step(&mut params, &grad, &mut state, &adam)?;
            model.set_params(&params)?;
        }
        loss_curve.push(total / data.len() as f64);
        accuracy_curve.push(model.accuracy(data)?);
        epoch_times.push(start.elapsed().as_secs_f64());
    }
    let report = QuanvReport {
        n_circuits: model.layer.shape.n_circuits(),
        n_qubits: model.layer.shape.n_qubits(),
        n_params: model.n_params(),
        dataset_size: data.len(),
        n_classes: data.n_classes,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        untrained_accuracy,
        final_accuracy: accuracy_curve.last().copied().unwrap_or(untrained_accuracy),
        accuracy_curve,
        loss_curve,
        epoch_times,
        threads: crate::worker_threads(),
    };
    Ok((report, model))
}

/// Where demo images come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    /// [`synthetic_bright_halves`] with the layer's input channel count.
    Synthetic {
        n_per_class: usize,
        height: usize,
        width: usize,
        noise: f64,
    },
    /// Labeled images read with [`read_csv_images`].
    Csv { path: PathBuf, format: CsvImageFormat },
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic {
            n_per_class: 32,
            height: 8,
            width: 8,
            noise: 0.3,
        }
    }
}

impl DatasetSource {
    pub fn load(&self, channels: usize, seed: u64) -> Result<LabeledImages> {
        match self {
            DatasetSource::Synthetic {
                n_per_class,
                height,
                width,
                noise,
            } => synthetic_bright_halves(*n_per_class, channels, *height, *width, *noise, seed),
            DatasetSource::Csv { path, format } => {
                let data = read_csv_images(File::open(path)?, format)?;
                if data.images.channels() != channels {
                    return Err(Error::Config(format!(
                        "dataset has {} channels, layer expects {channels}",
                        data.images.channels()
                    )));
                }
                Ok(data)
            }
        }
    }
}

fn demo_train_defaults() -> TrainConfig {
    TrainConfig {
        epochs: 200,
        batch_size: 16,
        ..TrainConfig::default()
    }
}

/// Everything the demo reads from its config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuanvDemoConfig {
    #[serde(default)]
    pub shape: QuanvShape,
    #[serde(default = "demo_train_defaults")]
    pub train: TrainConfig,
    #[serde(default)]
    pub dataset: DatasetSource,
    #[serde(default)]
    pub init: Init,
}

impl Default for QuanvDemoConfig {
    fn default() -> Self {
        QuanvDemoConfig {
            shape: QuanvShape::default(),
            train: demo_train_defaults(),
            dataset: DatasetSource::default(),
            init: Init::Random,
        }
    }
}

/// Loads the data, initializes the layer and trains.
pub fn run_quanv_demo(cfg: &QuanvDemoConfig) -> Result<(QuanvReport, QuanvClassifier)> {
    cfg.shape.validate()?;
    let seed = cfg.train.seed;
    let data = cfg.dataset.load(cfg.shape.in_channels, derive_seed(seed, "quanv-data"))?;
    let layer = match cfg.init {
        Init::Random => QuanvSpec::random(cfg.shape.clone(), derive_seed(seed, "quanv-layer"))?,
        Init::Zero => QuanvSpec::identity(cfg.shape.clone())?,
    };
    train_quanv_demo(&data, layer, &cfg.train)
}
