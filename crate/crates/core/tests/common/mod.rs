//! Reference implementations used as test oracles. Everything here is
//! deliberately naive (triple loops, explicit bit manipulation, Taylor
//! series) and shares no code paths with the library kernels.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use unitary_forge::linalg::ComplexMatrix;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * scale
    })
}

pub fn random_state(n_qubits: usize, batch: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    let d = 1 << n_qubits;
    let mut out = Vec::with_capacity(batch * d);
    for _ in 0..batch {
        let v: Vec<C> = (0..d)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.extend(v.into_iter().map(|z| z / norm));
    }
    out
}

pub fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a[(i, k)];
            for j in 0..d {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

pub fn naive_adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.dim(), |i, j| a[(j, i)].conj())
}

pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut m: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn max_diff_vec(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn inf_norm(a: &ComplexMatrix) -> f64 {
    (0..a.dim())
        .map(|i| (0..a.dim()).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Kahan-compensated accumulator for complex sums.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: C,
    comp: C,
}

impl Kahan {
    fn add(&mut self, x: C) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `exp(a)` by scaling to norm ≤ 1/4, a compensated Taylor series run
/// until terms vanish, then repeated squaring.
pub fn taylor_expm(a: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    let norm = inf_norm(a);
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let b = ComplexMatrix::from_fn(d, |i, j| a[(i, j)] * scale);
    let mut acc = vec![Kahan::default(); d * d];
    let mut term = ComplexMatrix::identity(d);
    for k in 1..=60 {
        for i in 0..d {
            for j in 0..d {
                acc[i * d + j].add(term[(i, j)]);
            }
        }
        let next = naive_mul(&term, &b);
        term = ComplexMatrix::from_fn(d, |i, j| next[(i, j)] / k as f64);
        if inf_norm(&term) < 1e-300 {
            break;
        }
    }
    let mut e = ComplexMatrix::from_fn(d, |i, j| acc[i * d + j].sum);
    for _ in 0..s {
        e = naive_mul(&e, &e);
    }
    e
}

/// Fréchet derivative of `exp` at `a` in direction `e`: the upper-right
/// block of `exp([[a, e], [0, a]])`.
pub fn frechet_oracle(a: &ComplexMatrix, e: &ComplexMatrix) -> ComplexMatrix {
    let d = a.dim();
    let big = ComplexMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
        (true, true) => a[(i, j)],
        (true, false) => e[(i, j - d)],
        (false, false) => a[(i - d, j - d)],
        (false, true) => c(0.0, 0.0),
    });
    let x = taylor_expm(&big);
    ComplexMatrix::from_fn(d, |i, j| x[(i, j + d)])
}

pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    max_diff(&naive_mul(&naive_adjoint(u), u), &ComplexMatrix::identity(u.dim()))
}

/// Skew-Hermitian matrix from the row-major coordinate layout: diagonal
/// imaginary part, then (re, im) of each entry right of it.
pub fn assemble_oracle(d: usize, theta: &[f64]) -> ComplexMatrix {
    assert_eq!(theta.len(), d * d);
    let mut x = ComplexMatrix::zeros(d);
    let mut k = 0;
    for i in 0..d {
        x[(i, i)] = c(0.0, theta[k]);
        k += 1;
        for j in i + 1..d {
            x[(i, j)] = c(theta[k], theta[k + 1]);
            x[(j, i)] = -x[(i, j)].conj();
            k += 2;
        }
    }
    x
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(da * db, |i, j| a[(i / db, j / db)] * b[(i % db, j % db)])
}

fn bit(index: usize, n_qubits: usize, wire: usize) -> usize {
    (index >> (n_qubits - 1 - wire)) & 1
}

/// Dense `2^n` operator acting as `u` on `wires` (first wire = most
/// significant qubit of `u`) and as identity elsewhere.
pub fn embed(n_qubits: usize, wires: &[usize], u: &ComplexMatrix) -> ComplexMatrix {
    let k = wires.len();
    assert_eq!(u.dim(), 1 << k);
    let sub = |i: usize| wires.iter().fold(0, |acc, &w| (acc << 1) | bit(i, n_qubits, w));
    let outside = |i: usize| {
        let mut m = i;
        for &w in wires {
            m &= !(1 << (n_qubits - 1 - w));
        }
        m
    };
    ComplexMatrix::from_fn(1 << n_qubits, |i, j| {
        if outside(i) == outside(j) {
            u[(sub(i), sub(j))]
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn mat2(m: [[C; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| m[i][j])
}

pub fn rx(t: f64) -> ComplexMatrix {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    mat2([[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]])
}

pub fn ry(t: f64) -> ComplexMatrix {
    let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
    mat2([[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]])
}

pub fn rz(t: f64) -> ComplexMatrix {
    mat2([[C::from_polar(1.0, -t / 2.0), c(0.0, 0.0)], [c(0.0, 0.0), C::from_polar(1.0, t / 2.0)]])
}

pub fn cnot(n_qubits: usize, control: usize, target: usize) -> ComplexMatrix {
    let flip = 1 << (n_qubits - 1 - target);
    ComplexMatrix::from_fn(1 << n_qubits, |i, j| {
        let image = if bit(j, n_qubits, control) == 1 { j ^ flip } else { j };
        if i == image {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn matvec(m: &ComplexMatrix, v: &[C]) -> Vec<C> {
    let d = m.dim();
    (0..d).map(|i| (0..d).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// Applies `m` to every row of a row-major batch.
pub fn apply_rows(m: &ComplexMatrix, batch: &[C]) -> Vec<C> {
    batch.chunks(m.dim()).flat_map(|row| matvec(m, row)).collect()
}

/// `⊗_w (cos(x_w/2)|0> - i sin(x_w/2)|1>)`.
pub fn product_state(angles: &[f64]) -> Vec<C> {
    let mut v = vec![c(1.0, 0.0)];
    for &x in angles {
        let (z, o) = (c((x / 2.0).cos(), 0.0), c(0.0, -(x / 2.0).sin()));
        v = v.iter().flat_map(|&a| [a * z, a * o]).collect();
    }
    v
}

pub fn z_expect(n_qubits: usize, psi: &[C]) -> Vec<f64> {
    (0..n_qubits)
        .map(|w| {
            psi.iter()
                .enumerate()
                .map(|(j, a)| if bit(j, n_qubits, w) == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum()
        })
        .collect()
}

/// Mean squared error of `Z`-decoded outputs of `u` on RX-encoded rows.
pub fn dense_identity_loss(n_qubits: usize, u: &ComplexMatrix, features: &[f64], targets: &[f64]) -> f64 {
    let mut total = 0.0;
    for (row, t) in features.chunks(n_qubits).zip(targets.chunks(n_qubits)) {
        let z = z_expect(n_qubits, &matvec(u, &product_state(row)));
        total += z.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    total / features.len() as f64
}

/// Central differences of `f` at `x`.
pub fn central_diff(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest violation of `|a - b| <= rtol |b| + atol`, as a ratio (≤ 1 passes).
pub fn worst_ratio(a: &[f64], b: &[f64], rtol: f64, atol: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (rtol * y.abs() + atol))
        .fold(0.0, f64::max)
}
