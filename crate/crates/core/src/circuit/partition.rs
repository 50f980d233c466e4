use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroup::SkewHermitianParams;

/// Disjoint wire groups covering `0..n_qubits` exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WirePartition {
    pub groups: Vec<Vec<usize>>,
}

impl WirePartition {
    pub fn new(n_qubits: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let p = WirePartition { groups };
        p.validate(n_qubits)?;
        Ok(p)
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let mut seen = vec![false; n_qubits];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::Contract("partition contains an empty group".into()));
            }
            for &w in group {
                match seen.get_mut(w) {
                    None => return Err(Error::Contract(format!("wire {w} out of range for {n_qubits} qubits"))),
                    Some(true) => return Err(Error::Contract(format!("wire {w} appears in two groups"))),
                    Some(s) => *s = true,
                }
            }
        }
        if let Some(w) = seen.iter().position(|s| !s) {
            return Err(Error::Contract(format!("wire {w} is not covered by the partition")));
        }
        Ok(())
    }

    /// Consecutive groups of `group_size` wires after cyclically shifting
    /// the wire order by `offset`.
    pub fn shifted_blocks(n_qubits: usize, group_size: usize, offset: usize) -> Result<Self> {
        if group_size == 0 || n_qubits % group_size != 0 {
            return Err(Error::Config(format!(
                "group size {group_size} does not divide {n_qubits} wires"
            )));
        }
        let groups = (0..n_qubits / group_size)
            .map(|g| {
                (0..group_size)
                    .map(|t| (offset + g * group_size + t) % n_qubits)
                    .collect()
            })
            .collect();
        Self::new(n_qubits, groups)
    }
}

/// One layer: a partition plus one generator per group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionLayer {
    pub partition: WirePartition,
    pub params: Vec<SkewHermitianParams>,
}

/// Product over layers of tensor products of per-group unitaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionedUnitary {
    pub n_qubits: usize,
    pub layers: Vec<PartitionLayer>,
}

impl PartitionedUnitary {
    pub fn new(n_qubits: usize, layers: Vec<PartitionLayer>) -> Result<Self> {
        let pu = PartitionedUnitary { n_qubits, layers };
        pu.validate()?;
        Ok(pu)
    }

    /// `layers` partitions into groups of `group_size`; layer `l` is shifted
    /// by `l mod group_size` wires so consecutive layers straddle the
    /// previous group boundaries. Generators are drawn with
    /// [`SkewHermitianParams::random`].
    pub fn brickwork<R: Rng + ?Sized>(n_qubits: usize, group_size: usize, layers: usize, rng: &mut R) -> Result<Self> {
        if layers == 0 {
            return Err(Error::Config("need at least one layer".into()));
        }
        let layers = (0..layers)
            .map(|l| {
                let partition = WirePartition::shifted_blocks(n_qubits, group_size, l % group_size)?;
                let params = partition
                    .groups
                    .iter()
                    .map(|g| SkewHermitianParams::random(1 << g.len(), rng))
                    .collect();
                Ok(PartitionLayer { partition, params })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, layers)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Contract("partitioned unitary has no layers".into()));
        }
        for layer in &self.layers {
            layer.partition.validate(self.n_qubits)?;
            if layer.params.len() != layer.partition.groups.len() {
                return Err(Error::Contract(format!(
                    "{} groups but {} generators",
                    layer.partition.groups.len(),
                    layer.params.len()
                )));
            }
            for (g, p) in layer.partition.groups.iter().zip(&layer.params) {
                if p.dim() != 1 << g.len() {
                    return Err(Error::Contract(format!(
                        "group {g:?} needs a generator of dimension {}, got {}",
                        1 << g.len(),
                        p.dim()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `Σ_layers Σ_groups 2^(2k)`.
    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| &l.params)
            .map(|p| p.theta().len())
            .sum()
    }

    /// Parameters flattened layer by layer, group by group.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| &l.params)
            .flat_map(|p| p.theta().iter().copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                found: flat.len(),
            });
        }
        let mut offset = 0;
        for p in self.layers.iter_mut().flat_map(|l| &mut l.params) {
            let n = p.theta().len();
            p.theta_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }
}
