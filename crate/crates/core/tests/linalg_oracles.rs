mod common;

use common::*;
use proptest::prelude::*;
use unitary_forge::linalg::{lu_factor, matexp, matexp_frechet, matexp_vjp, random_unitary, unitarity_error, ComplexMatrix};
use unitary_forge::Error;

fn rel_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let scale = (0..b.dim())
        .flat_map(|i| (0..b.dim()).map(move |j| (i, j)))
        .map(|(i, j)| b[(i, j)].norm())
        .fold(1.0, f64::max);
    max_diff(a, b) / scale
}

#[test]
fn exp_matches_taylor_oracle_across_norms() {
    let mut r = rng(11);
    // scales chosen to hit every Padé degree and several squaring counts
    for &d in &[1, 2, 3, 5, 8, 16] {
        for &scale in &[1e-4, 1e-2, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let a = random_matrix(d, scale / (d as f64).sqrt(), &mut r);
            let got = matexp(&a).unwrap();
            let want = taylor_expm(&a);
            assert!(rel_diff(&got, &want) < 1e-11, "d={d} scale={scale}: {}", rel_diff(&got, &want));
        }
    }
}

#[test]
fn exp_of_skew_hermitian_matches_oracle_and_is_unitary() {
    let mut r = rng(12);
    for &d in &[2, 4, 8, 32] {
        let x = random_matrix(d, 1.0, &mut r);
        let a = ComplexMatrix::from_fn(d, |i, j| (x[(i, j)] - x[(j, i)].conj()) * 0.5);
        let u = matexp(&a).unwrap();
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((unitarity_error(&u) - unitarity_defect(&u)).abs() < 1e-12);
        if d <= 8 {
            assert!(max_diff(&u, &taylor_expm(&a)) < 1e-11);
        }
    }
}

#[test]
fn frechet_matches_augmented_block_oracle() {
    let mut r = rng(13);
    for &d in &[1, 2, 4, 7] {
        for &scale in &[1e-3, 0.2, 1.0, 4.0] {
            let a = random_matrix(d, scale / (d as f64).sqrt(), &mut r);
            let e = random_matrix(d, 1.0, &mut r);
            let (ea, l) = matexp_frechet(&a, &e).unwrap();
            let want = frechet_oracle(&a, &e);
            assert!(rel_diff(&l, &want) < 1e-10, "d={d} scale={scale}: {}", rel_diff(&l, &want));
            assert!(rel_diff(&ea, &taylor_expm(&a)) < 1e-11);
        }
    }
}

#[test]
fn frechet_matches_finite_differences() {
    let mut r = rng(14);
    let a = random_matrix(6, 0.5, &mut r);
    let e = random_matrix(6, 1.0, &mut r);
    let h = 1e-6;
    let plus = ComplexMatrix::from_fn(6, |i, j| a[(i, j)] + e[(i, j)] * h);
    let minus = ComplexMatrix::from_fn(6, |i, j| a[(i, j)] - e[(i, j)] * h);
    let (ep, em) = (taylor_expm(&plus), taylor_expm(&minus));
    let fd = ComplexMatrix::from_fn(6, |i, j| (ep[(i, j)] - em[(i, j)]) / (2.0 * h));
    let (_, l) = matexp_frechet(&a, &e).unwrap();
    assert!(rel_diff(&l, &fd) < 1e-7);
}

#[test]
fn vjp_is_the_adjoint_of_the_frechet_derivative() {
    // <G, L(A, E)> = <vjp(A, G), E> with <X, Y> = Re tr(X^H Y)
    let mut r = rng(15);
    for &d in &[2, 5, 16] {
        for &scale in &[0.05, 1.0, 6.0] {
            let a = random_matrix(d, scale / (d as f64).sqrt(), &mut r);
            let e = random_matrix(d, 1.0, &mut r);
            let g = random_matrix(d, 1.0, &mut r);
            let (_, l) = matexp_frechet(&a, &e).unwrap();
            let abar = matexp_vjp(&a, &g).unwrap();
            let lhs = g.real_inner(&l);
            let rhs = abar.real_inner(&e);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "d={d}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn vjp_matches_block_oracle_entrywise() {
    // vjp(A, G) = L(A^H, G)
    let mut r = rng(16);
    let a = random_matrix(5, 0.7, &mut r);
    let g = random_matrix(5, 1.0, &mut r);
    let want = frechet_oracle(&naive_adjoint(&a), &g);
    assert!(rel_diff(&matexp_vjp(&a, &g).unwrap(), &want) < 1e-10);
}

#[test]
fn vjp_dimension_mismatch_is_a_contract_error() {
    let err = matexp_vjp(&ComplexMatrix::zeros(2), &ComplexMatrix::zeros(3)).unwrap_err();
    assert!(matches!(err, Error::Contract(_) | Error::Dimension { .. }));
}

#[test]
fn non_finite_input_is_a_domain_error() {
    let mut a = ComplexMatrix::zeros(3);
    a[(1, 2)] = c(f64::INFINITY, 0.0);
    assert!(matches!(matexp(&a), Err(Error::Domain(_))));
}

#[test]
fn lu_solves_against_naive_products() {
    let mut r = rng(17);
    for &d in &[1, 4, 33, 100] {
        let mut a = random_matrix(d, 1.0, &mut r);
        a.add_identity(d as f64 * 0.1);
        let b = random_matrix(d, 1.0, &mut r);
        let x = lu_factor(&a).unwrap().solve(&b);
        let residual = max_diff(&naive_mul(&a, &x), &b);
        assert!(residual < 1e-10, "d={d}: residual {residual}");
    }
}

#[test]
fn random_unitaries_are_unitary_and_seeded() {
    for &d in &[2, 8, 64] {
        let u = random_unitary(d, 3).unwrap();
        assert!(unitarity_defect(u.matrix()) < 1e-10);
        assert_eq!(u, random_unitary(d, 3).unwrap());
    }
}

fn matrix_strategy(d: usize, scale: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-scale..scale, -scale..scale), d * d)
        .prop_map(move |v| ComplexMatrix::from_fn(d, |i, j| c(v[i * d + j].0, v[i * d + j].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exp_of_commuting_sum_factorizes(a in matrix_strategy(4, 1.0), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        // exp((s+t)A) = exp(sA) exp(tA)
        let sa = ComplexMatrix::from_fn(4, |i, j| a[(i, j)] * s);
        let ta = ComplexMatrix::from_fn(4, |i, j| a[(i, j)] * t);
        let sum = ComplexMatrix::from_fn(4, |i, j| a[(i, j)] * (s + t));
        let lhs = matexp(&sum).unwrap();
        let rhs = naive_mul(&matexp(&sa).unwrap(), &matexp(&ta).unwrap());
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn exp_inverse_is_exp_of_negative(a in matrix_strategy(3, 2.0)) {
        let neg = ComplexMatrix::from_fn(3, |i, j| -a[(i, j)]);
        let prod = naive_mul(&matexp(&a).unwrap(), &matexp(&neg).unwrap());
        prop_assert!(max_diff(&prod, &ComplexMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn frechet_is_linear_in_direction(a in matrix_strategy(3, 1.0), e in matrix_strategy(3, 1.0), f in matrix_strategy(3, 1.0)) {
        let sum = ComplexMatrix::from_fn(3, |i, j| e[(i, j)] + f[(i, j)]);
        let (_, le) = matexp_frechet(&a, &e).unwrap();
        let (_, lf) = matexp_frechet(&a, &f).unwrap();
        let (_, ls) = matexp_frechet(&a, &sum).unwrap();
        let add = ComplexMatrix::from_fn(3, |i, j| le[(i, j)] + lf[(i, j)]);
        prop_assert!(rel_diff(&ls, &add) < 1e-12);
    }
}
