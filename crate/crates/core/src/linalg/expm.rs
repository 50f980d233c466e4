//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants, and its Fréchet derivative.
//!
//! Degree selection for the plain exponential follows Higham (2005); the
//! derivative evaluates the same approximant on the block upper-triangular
//! matrix `[[A, E], [0, A]]` without materializing it, with degree
//! thresholds from Al-Mohy & Higham (2009). Every product of two such
//! block matrices `[[X, Y], [0, X]]` costs three `d x d` products instead
//! of eight, which is what makes gradients affordable at `d = 1024`.

use super::lu::lu_factor;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bounds below which the degree-m approximant is accurate to unit
// roundoff, for m = 3, 5, 7, 9, 13.
const EXP_THETA: [f64; 5] = [
    1.495585217958292e-2,
    2.539398330063230e-1,
    9.504178996162932e-1,
    2.097847961257068e0,
    5.371920351148152e0,
];
// Same, for the exponential together with its Fréchet derivative.
const FRECHET_ELL: [f64; 5] = [1.08e-2, 2.00e-1, 7.83e-1, 1.78e0, 4.74e0];

fn ensure_finite(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} has non-finite entries")))
    }
}

/// A matrix together with (optionally) the directional derivative carried
/// along with it, i.e. the two distinct blocks of `[[X, dX], [0, X]]`.
struct Dual {
    value: ComplexMatrix,
    tangent: Option<ComplexMatrix>,
}

impl Dual {
    fn mul(&self, rhs: &Dual) -> Dual {
        let value = self.value.matmul(&rhs.value);
        let tangent = match (&self.tangent, &rhs.tangent) {
            (Some(t1), Some(t2)) => Some(self.value.matmul_add(t2, t1, &rhs.value)),
            _ => None,
        };
        Dual { value, tangent }
    }

    /// `sum_k coeffs[k] * terms[k] + diag * I`.
    fn combine(terms: &[(f64, &Dual)], diag: f64) -> Dual {
        let value = ComplexMatrix::combination(
            &terms.iter().map(|&(c, d)| (c, &d.value)).collect::<Vec<_>>(),
            diag,
        );
        let tangent = if terms.iter().all(|(_, d)| d.tangent.is_some()) {
            let parts: Vec<_> = terms
                .iter()
                .map(|&(c, d)| (c, d.tangent.as_ref().unwrap()))
                .collect();
            Some(ComplexMatrix::combination(&parts, 0.0))
        } else {
            None
        };
        Dual { value, tangent }
    }
}

/// Numerator/denominator pieces `U` (odd part) and `V` (even part) of the
/// degree-m diagonal Padé approximant, carried as duals.
fn pade_parts(a: &Dual, degree: usize) -> (Dual, Dual) {
    let a2 = a.mul(a);
    match degree {
        3 | 5 | 7 | 9 => {
            let b: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let mut powers = vec![a2];
            while powers.len() < (degree - 1) / 2 {
                let next = match powers.len() {
                    // A^4 = A^2 A^2, A^6 = A^2 A^4, A^8 = A^4 A^4
                    1 => powers[0].mul(&powers[0]),
                    2 => powers[0].mul(&powers[1]),
                    _ => powers[1].mul(&powers[1]),
                };
                powers.push(next);
            }
            let odd: Vec<(f64, &Dual)> = powers
                .iter()
                .enumerate()
                .map(|(j, p)| (b[2 * j + 3], p))
                .collect();
            let even: Vec<(f64, &Dual)> = powers
                .iter()
                .enumerate()
                .map(|(j, p)| (b[2 * j + 2], p))
                .collect();
            let u = a.mul(&Dual::combine(&odd, b[1]));
            let v = Dual::combine(&even, b[0]);
            (u, v)
        }
        13 => {
            let b = &PADE13;
            let a4 = a2.mul(&a2);
            let a6 = a2.mul(&a4);
            let w1 = Dual::combine(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
            let w2 = Dual::combine(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1]);
            let z1 = Dual::combine(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
            let z2 = Dual::combine(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0]);
            let w = Dual::combine(&[(1.0, &a6.mul(&w1)), (1.0, &w2)], 0.0);
            let u = a.mul(&w);
            let v = Dual::combine(&[(1.0, &a6.mul(&z1)), (1.0, &z2)], 0.0);
            (u, v)
        }
        _ => unreachable!("unsupported Padé degree {degree}"),
    }
}

fn scaled_exp(a: &ComplexMatrix, direction: Option<&ComplexMatrix>) -> Result<(ComplexMatrix, Option<ComplexMatrix>)> {
    let thresholds = if direction.is_some() { &FRECHET_ELL } else { &EXP_THETA };
    let norm = a.norm_one();

    let (degree, squarings) = match [3usize, 5, 7, 9]
        .iter()
        .zip(thresholds.iter())
        .find(|(_, &t)| norm <= t)
    {
        Some((&m, _)) => (m, 0u32),
        None => {
            let s = (norm / thresholds[4]).log2().ceil().max(0.0) as u32;
            (13, s)
        }
    };

    let scale = 0.5f64.powi(squarings as i32);
    let x = Dual {
        value: a.scale_real(scale),
        tangent: direction.map(|e| e.scale_real(scale)),
    };
    let (u, v) = pade_parts(&x, degree);

    let q = &v.value - &u.value;
    let lu = lu_factor(&q)?;
    let mut r = lu.solve(&(&v.value + &u.value));
    let mut l = match (u.tangent, v.tangent) {
        (Some(lu_t), Some(lv_t)) => {
            // d/dt of Q^{-1} P with dP = Lu + Lv and dQ = Lv - Lu
            let mut rhs = (&lu_t - &lv_t).matmul(&r);
            rhs.axpy(1.0, &lu_t);
            rhs.axpy(1.0, &lv_t);
            Some(lu.solve(&rhs))
        }
        _ => None,
    };

    for _ in 0..squarings {
        if let Some(lt) = l.as_ref() {
            l = Some(r.matmul_add(lt, lt, &r));
        }
        r = r.matmul(&r);
    }
    Ok((r, l))
}

/// Matrix exponential `exp(A)`.
pub fn matexp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_finite(a, "matrix")?;
    Ok(scaled_exp(a, None)?.0)
}

/// `exp(A)` together with the Fréchet derivative `L(A, E) = d/dt exp(A + tE)|_0`.
///
/// `L(A, E)` is the upper-right block of `exp([[A, E], [0, A]])`.
pub fn matexp_frechet(a: &ComplexMatrix, e: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if a.dim() != e.dim() {
        return Err(Error::Contract(format!(
            "direction has dimension {} but matrix has dimension {}",
            e.dim(),
            a.dim()
        )));
    }
    ensure_finite(a, "matrix")?;
    ensure_finite(e, "direction")?;
    let (r, l) = scaled_exp(a, Some(e))?;
    Ok((r, l.expect("derivative requested")))
}

/// Vector-Jacobian product of the exponential: for a cotangent `G` of
/// `exp(A)`, returns `Ā = L(A^H, G)`, the adjoint of `E -> L(A, E)` under
/// `<X, Y> = Re tr(X^H Y)`.
pub fn matexp_vjp(a: &ComplexMatrix, cotangent: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != cotangent.dim() {
        return Err(Error::Contract(format!(
            "cotangent has dimension {} but matrix has dimension {}",
            cotangent.dim(),
            a.dim()
        )));
    }
    Ok(matexp_frechet(&a.adjoint(), cotangent)?.1)
}

/// `max_ij |(M^H M - I)_ij|`.
pub fn unitarity_error(m: &ComplexMatrix) -> f64 {
    let mut gram = m.adjoint().matmul(m);
    gram.add_identity(-1.0);
    gram.max_abs()
}
