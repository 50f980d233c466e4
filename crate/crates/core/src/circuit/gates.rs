use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kernels::{apply_cnot, apply_single, check_wires, single_cotangent};
use super::state::StateBatch;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Probability of a CNOT following each rotation in [`random_layer`].
pub const RANDOM_LAYER_CNOT_PROBABILITY: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::Cnot)
    }
}

/// One gate of an ansatz. Rotations act on `wires[0]`; a CNOT uses
/// `wires = [control, target]` and carries no angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl GateOp {
    pub fn rx(wire: usize, theta: f64) -> Self {
        Self::rotation(GateKind::Rx, wire, theta)
    }

    pub fn ry(wire: usize, theta: f64) -> Self {
        Self::rotation(GateKind::Ry, wire, theta)
    }

    pub fn rz(wire: usize, theta: f64) -> Self {
        Self::rotation(GateKind::Rz, wire, theta)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::Cnot,
            wires: vec![control, target],
            theta: None,
        }
    }

    fn rotation(kind: GateKind, wire: usize, theta: f64) -> Self {
        GateOp {
            kind,
            wires: vec![wire],
            theta: Some(theta),
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let arity = if self.kind.is_rotation() { 1 } else { 2 };
        if self.wires.len() != arity {
            return Err(Error::Contract(format!(
                "{:?} acts on {arity} wire(s), got {:?}",
                self.kind, self.wires
            )));
        }
        check_wires(n_qubits, &self.wires)?;
        match (self.kind.is_rotation(), self.theta) {
            (true, Some(t)) if t.is_finite() => Ok(()),
            (true, _) => Err(Error::Contract(format!("{:?} needs a finite angle", self.kind))),
            (false, None) => Ok(()),
            (false, Some(_)) => Err(Error::Contract("CNOT takes no angle".into())),
        }
    }

    /// Row-major 2x2 matrix of a rotation; `None` for CNOT.
    pub fn matrix2(&self) -> Option<[Complex64; 4]> {
        let t = self.theta?;
        Some(rotation_matrix(self.kind, t))
    }

    /// Inverse gate.
    pub fn inverse(&self) -> GateOp {
        GateOp {
            theta: self.theta.map(|t| -t),
            ..self.clone()
        }
    }

    /// Dense `2^n x 2^n` matrix, for oracles and small circuits.
    pub fn dense(&self, n_qubits: usize) -> ComplexMatrix {
        let dim = 1usize << n_qubits;
        let mut m = ComplexMatrix::identity(dim);
        let mut cols = m.transpose().into_vec();
        // each row of `cols` is a basis vector; apply the gate to it
        self.apply_in_place(&mut cols, n_qubits);
        m = ComplexMatrix::from_vec(dim, cols).expect("square").transpose();
        m
    }

    pub(crate) fn apply_in_place(&self, amps: &mut [Complex64], n_qubits: usize) {
        match self.matrix2() {
            Some(m) => apply_single(amps, n_qubits, self.wires[0], &m),
            None => apply_cnot(amps, n_qubits, self.wires[0], self.wires[1]),
        }
    }
}

fn rotation_matrix(kind: GateKind, theta: f64) -> [Complex64; 4] {
    let (s, c) = (0.5 * theta).sin_cos();
    let z = Complex64::new(0.0, 0.0);
    match kind {
        GateKind::Rx => [
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
        GateKind::Ry => [Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        GateKind::Rz => [Complex64::new(c, -s), z, z, Complex64::new(c, s)],
        GateKind::Cnot => unreachable!("CNOT has no rotation matrix"),
    }
}

/// Derivative of the rotation matrix with respect to its angle.
fn rotation_derivative(kind: GateKind, theta: f64) -> [Complex64; 4] {
    // d/dθ R(θ) = R(θ + π) / 2 for all three Pauli rotations
    let m = rotation_matrix(kind, theta + PI);
    m.map(|z| z * 0.5)
}

/// Applies one gate to every row.
pub fn apply_gate(s: &StateBatch, g: &GateOp) -> Result<StateBatch> {
    g.validate(s.n_qubits())?;
    let mut amps = s.amplitudes().to_vec();
    g.apply_in_place(&mut amps, s.n_qubits());
    Ok(StateBatch::from_kernel(s.n_qubits(), s.batch(), amps))
}

/// Ordered list of gates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnsatzCircuit {
    pub ops: Vec<GateOp>,
}

impl AnsatzCircuit {
    pub fn new(ops: Vec<GateOp>) -> Self {
        AnsatzCircuit { ops }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        self.ops.iter().try_for_each(|g| g.validate(n_qubits))
    }

    pub fn n_params(&self) -> usize {
        self.ops.iter().filter(|g| g.kind.is_rotation()).count()
    }

    /// Rotation angles in circuit order.
    pub fn angles(&self) -> Vec<f64> {
        self.ops.iter().filter_map(|g| g.theta).collect()
    }

    pub fn set_angles(&mut self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                found: angles.len(),
            });
        }
        let mut it = angles.iter();
        for g in self.ops.iter_mut().filter(|g| g.kind.is_rotation()) {
            g.theta = it.next().copied();
        }
        Ok(())
    }

    /// Dense product of all gates (last gate leftmost).
    pub fn dense(&self, n_qubits: usize) -> ComplexMatrix {
        self.ops
            .iter()
            .fold(ComplexMatrix::identity(1 << n_qubits), |acc, g| g.dense(n_qubits).matmul(&acc))
    }

    /// Angle gradients by a reverse sweep that un-computes the states,
    /// given the circuit output and the cotangent of that output.
    pub(crate) fn backward(&self, n_qubits: usize, output: &[Complex64], cotangent: &[Complex64]) -> Vec<f64> {
        let mut psi = output.to_vec();
        let mut cot = cotangent.to_vec();
        let mut grads = vec![0.0; self.n_params()];
        let mut slot = grads.len();
        for g in self.ops.iter().rev() {
            let inv = g.inverse();
            inv.apply_in_place(&mut psi, n_qubits);
            if let Some(theta) = g.theta {
                slot -= 1;
                let gbar = single_cotangent(&psi, &cot, n_qubits, g.wires[0]);
                let du = rotation_derivative(g.kind, theta);
                grads[slot] = gbar.iter().zip(&du).map(|(a, b)| (a.conj() * b).re).sum();
            }
            inv.apply_in_place(&mut cot, n_qubits);
        }
        grads
    }
}

/// Applies the gates in order.
pub fn run_ansatz(s: &StateBatch, c: &AnsatzCircuit) -> Result<StateBatch> {
    c.validate(s.n_qubits())?;
    let mut amps = s.amplitudes().to_vec();
    for g in &c.ops {
        g.apply_in_place(&mut amps, s.n_qubits());
    }
    Ok(StateBatch::from_kernel(s.n_qubits(), s.batch(), amps))
}

/// Seeded composed-gate baseline with exactly `n_params` rotations.
///
/// Each rotation's axis is uniform over {X, Y, Z}, its wire uniform and its
/// angle uniform in `[0, 2π)`; after each rotation a CNOT on a uniformly
/// chosen ordered wire pair follows with probability
/// [`RANDOM_LAYER_CNOT_PROBABILITY`] (never on a single wire).
pub fn random_layer(n_qubits: usize, n_params: usize, seed: u64) -> Result<AnsatzCircuit> {
    if n_qubits == 0 {
        return Err(Error::Contract("need at least one qubit".into()));
    }
    if n_params == 0 {
        return Err(Error::Contract("a random layer needs at least one parameter".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = Vec::with_capacity(n_params + n_params / 2);
    for _ in 0..n_params {
        let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][rng.random_range(0..3)];
        let wire = rng.random_range(0..n_qubits);
        let theta = rng.random_range(0.0..2.0 * PI);
        ops.push(GateOp::rotation(kind, wire, theta));
        if n_qubits > 1 && rng.random_bool(RANDOM_LAYER_CNOT_PROBABILITY) {
            let control = rng.random_range(0..n_qubits);
            let target = (control + rng.random_range(1..n_qubits)) % n_qubits;
            ops.push(GateOp::cnot(control, target));
        }
    }
    Ok(AnsatzCircuit { ops })
}
