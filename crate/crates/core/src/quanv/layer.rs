use serde::{Deserialize, Serialize};

use super::image::{extract_patches, ImageBatch};
use crate::circuit::{rx_encode, z_expectations, z_expectations_vjp, StateBatch};
use crate::error::{Error, Result};
use crate::liegroup::SkewHermitianParams;
use crate::model::{FullUnitaryModel, QuantumModel};
use crate::seed::rng_for;

/// Geometry of a quanvolutional layer.
///
/// Input channels are split into consecutive blocks of `channel_block`;
/// every output channel owns one `kernel²`-qubit circuit per block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuanvShape {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub channel_block: usize,
}

impl Default for QuanvShape {
    fn default() -> Self {
        QuanvShape {
            in_channels: 16,
            out_channels: 8,
            kernel: 2,
            stride: 1,
            channel_block: 4,
        }
    }
}

impl QuanvShape {
    pub fn validate(&self) -> Result<()> {
        if [self.in_channels, self.out_channels, self.kernel, self.stride, self.channel_block].contains(&0) {
            return Err(Error::Config("quanv shape entries must be positive".into()));
        }
        if self.in_channels % self.channel_block != 0 {
            return Err(Error::Config(format!(
                "channel block {} does not divide {} input channels",
                self.channel_block, self.in_channels
            )));
        }
        if self.kernel > 3 {
            return Err(Error::Config(format!("kernel {} needs more than 9 qubits", self.kernel)));
        }
        Ok(())
    }

    /// One qubit per window position.
    pub fn n_qubits(&self) -> usize {
        self.kernel * self.kernel
    }

    pub fn n_blocks(&self) -> usize {
        self.in_channels / self.channel_block
    }

    pub fn n_circuits(&self) -> usize {
        self.out_channels * self.n_blocks()
    }
}

/// A quanvolutional layer: its shape and one generator per circuit,
/// circuit `(o, b)` stored at index `o * n_blocks + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuanvSpec {
    pub shape: QuanvShape,
    pub circuits: Vec<SkewHermitianParams>,
}

impl QuanvSpec {
    pub fn new(shape: QuanvShape, circuits: Vec<SkewHermitianParams>) -> Result<Self> {
        let spec = QuanvSpec { shape, circuits };
        spec.validate()?;
        Ok(spec)
    }

    /// Every circuit the identity.
    pub fn identity(shape: QuanvShape) -> Result<Self> {
        shape.validate()?;
        let circuits = vec![SkewHermitianParams::zeros(1 << shape.n_qubits()); shape.n_circuits()];
        Self::new(shape, circuits)
    }

    /// Random generators, as for a randomly initialized full-unitary model.
    pub fn random(shape: QuanvShape, seed: u64) -> Result<Self> {
        shape.validate()?;
        let mut rng = rng_for(seed, "quanv-circuits");
        let dim = 1 << shape.n_qubits();
        let circuits = (0..shape.n_circuits())
            .map(|_| SkewHermitianParams::random(dim, &mut rng))
            .collect();
        Self::new(shape, circuits)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        if self.circuits.len() != self.shape.n_circuits() {
            return Err(Error::Contract(format!(
                "{} circuits given, shape needs {}",
                self.circuits.len(),
                self.shape.n_circuits()
            )));
        }
        let dim = 1 << self.shape.n_qubits();
        if let Some(p) = self.circuits.iter().find(|p| p.dim() != dim) {
            return Err(Error::Contract(format!("circuit of dimension {} in a {dim}-dimensional layer", p.dim())));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.circuits.iter().map(|p| p.theta().len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.circuits.iter().flat_map(|p| p.theta().iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                found: flat.len(),
            });
        }
        let per_circuit = flat.len() / self.circuits.len();
        for (p, chunk) in self.circuits.iter_mut().zip(flat.chunks(per_circuit)) {
            p.theta_mut().copy_from_slice(chunk);
        }
        Ok(())
    }

    fn model(&self, o: usize, b: usize) -> Result<FullUnitaryModel> {
        FullUnitaryModel::new(self.shape.n_qubits(), self.circuits[o * self.shape.n_blocks() + b].clone())
    }
}

/// Layer output, layout `[batch][channel][row][col]`, values in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMaps {
    pub batch: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
}

impl FeatureMaps {
    pub fn at(&self, b: usize, c: usize, y: usize, x: usize) -> f64 {
        self.values[((b * self.channels + c) * self.height + y) * self.width + x]
    }

    /// Values per image, flattened.
    pub fn features_per_image(&self) -> usize {
        self.channels * self.height * self.width
    }
}

/// Intermediate states kept for the backward pass.
pub(crate) struct QuanvTape {
    /// Encoded patches per channel block; row `(b * H' + y) * W' + x`.
    inputs: Vec<StateBatch>,
    /// Circuit outputs, indexed like the circuits.
    outputs: Vec<StateBatch>,
}

pub(crate) fn forward_with_tape(imgs: &ImageBatch, spec: &QuanvSpec) -> Result<(FeatureMaps, QuanvTape)> {
    spec.validate()?;
    let shape = &spec.shape;
    if imgs.channels() != shape.in_channels {
        return Err(Error::Dimension {
            expected: shape.in_channels,
            found: imgs.channels(),
        });
    }
    let patches = extract_patches(imgs, shape.kernel, shape.stride)?;
    let (oh, ow) = (patches.out_height, patches.out_width);
    let nq = shape.n_qubits();
    let locations = imgs.batch() * oh * ow;

    let mut inputs = Vec::with_capacity(shape.n_blocks());
    for blk in 0..shape.n_blocks() {
        let channels = blk * shape.channel_block..(blk + 1) * shape.channel_block;
        let mut angles = Vec::with_capacity(locations * nq);
        for b in 0..imgs.batch() {
            for y in 0..oh {
                for x in 0..ow {
                    for q in 0..nq {
                        let sum: f64 = channels.clone().map(|c| patches.patch(b, c, y, x)[q]).sum();
                        angles.push(sum / shape.channel_block as f64);
                    }
                }
            }
        }
        inputs.push(rx_encode(nq, &angles)?);
    }

    let norm = 1.0 / (shape.n_blocks() * nq) as f64;
    let mut values = vec![0.0; imgs.batch() * shape.out_channels * oh * ow];
    let mut outputs = Vec::with_capacity(shape.n_circuits());
    for o in 0..shape.out_channels {
        for (blk, input) in inputs.iter().enumerate() {
            let out = spec.model(o, blk)?.forward(input)?;
            let z = z_expectations(&out);
            for (loc, zs) in z.chunks(nq).enumerate() {
                let (b, yx) = (loc / (oh * ow), loc % (oh * ow));
                values[(b * shape.out_channels + o) * oh * ow + yx] += norm * zs.iter().sum::<f64>();
            }
            outputs.push(out);
        }
    }
    let maps = FeatureMaps {
        batch: imgs.batch(),
        channels: shape.out_channels,
        height: oh,
        width: ow,
        values,
    };
    Ok((maps, QuanvTape { inputs, outputs }))
}

/// Parameter gradient of the layer given the cotangent of its output maps,
/// flattened like [`QuanvSpec::flat_params`].
pub(crate) fn backward(spec: &QuanvSpec, tape: &QuanvTape, maps: &FeatureMaps, grad: &[f64]) -> Result<Vec<f64>> {
    if grad.len() != maps.values.len() {
        return Err(Error::Dimension {
            expected: maps.values.len(),
            found: grad.len(),
        });
    }
    let shape = &spec.shape;
    let nq = shape.n_qubits();
    let plane = maps.height * maps.width;
    let norm = 1.0 / (shape.n_blocks() * nq) as f64;
    let mut out = Vec::with_capacity(spec.n_params());
    for o in 0..shape.out_channels {
        // every wire of every block circuit feeds the map with weight `norm`
        let mut gz = Vec::with_capacity(maps.batch * plane * nq);
        for b in 0..maps.batch {
            for yx in 0..plane {
                let g = norm * grad[(b * shape.out_channels + o) * plane + yx];
                gz.extend(std::iter::repeat_n(g, nq));
            }
        }
        for (blk, input) in tape.inputs.iter().enumerate() {
            let output = &tape.outputs[o * shape.n_blocks() + blk];
            let cot = z_expectations_vjp(output, &gz)?;
            out.extend(spec.model(o, blk)?.backward(input, output, &cot)?);
        }
    }
    Ok(out)
}

/// Runs every circuit over every patch location.
///
/// At each location, circuit `(o, b)` encodes the channel-block-`b` mean of
/// the window (one RX angle per window position), applies its unitary and
/// decodes the Z expectations; output channel `o` is the mean of those
/// expectations over wires and blocks.
pub fn quanv_forward(imgs: &ImageBatch, spec: &QuanvSpec) -> Result<FeatureMaps> {
    Ok(forward_with_tape(imgs, spec)?.0)
}
