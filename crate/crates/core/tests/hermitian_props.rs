use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

use cogbeam::hermitian::{
    hermitian_eig, hermitian_eig_max, hermitian_inv_sqrt, hermitian_solve, hermitian_sqrt, CMatrix,
    CVector, HermitianMatrix,
};

fn hermitian(n: usize) -> impl Strategy<Value = HermitianMatrix> {
    prop::collection::vec(-3.0f64..3.0, 2 * n * n).prop_map(move |raw| {
        let x = CMatrix::from_fn(n, n, |i, j| Complex64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1]));
        HermitianMatrix::hermitize(&x + x.adjoint())
    })
}

fn any_hermitian() -> impl Strategy<Value = HermitianMatrix> {
    (1usize..=7).prop_flat_map(hermitian)
}

fn positive_definite() -> impl Strategy<Value = HermitianMatrix> {
    any_hermitian().prop_map(|m| {
        let g = m.as_matrix() * m.as_matrix().adjoint();
        HermitianMatrix::hermitize(g + CMatrix::identity(m.dim(), m.dim()) * Complex64::new(0.5, 0.0))
    })
}

fn reference_eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.as_matrix().clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigenvalues_match_reference(m in any_hermitian()) {
        let eig = hermitian_eig(&m).unwrap();
        let reference = reference_eigenvalues(&m);
        let scale = m.frobenius_norm().max(1.0);
        for (got, want) in eig.values.iter().zip(&reference) {
            prop_assert!((got - want).abs() <= 1e-10 * scale, "{got} vs {want}");
        }
    }

    #[test]
    fn decomposition_reconstructs_and_is_unitary(m in any_hermitian()) {
        let eig = hermitian_eig(&m).unwrap();
        let n = m.dim();
        let v = &eig.vectors;
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            eig.values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let rebuilt = v * lambda * v.adjoint();
        let scale = m.frobenius_norm().max(1.0);
        prop_assert!((rebuilt - m.as_matrix()).norm() <= 1e-10 * scale);
        prop_assert!((v.adjoint() * v - CMatrix::identity(n, n)).norm() <= 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trace_equals_eigenvalue_sum(m in any_hermitian()) {
        let eig = hermitian_eig(&m).unwrap();
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-10 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn rank_one_top_eigenpair(raw in prop::collection::vec(-2.0f64..2.0, 2..=14)) {
        let n = raw.len() / 2;
        let v = CVector::from_fn(n, |i, _| Complex64::new(raw[2 * i], raw[2 * i + 1]));
        prop_assume!(v.norm() > 1e-3);
        let top = hermitian_eig_max(&HermitianMatrix::outer(&v)).unwrap();
        prop_assert!((top.value - v.norm_squared()).abs() <= 1e-10 * v.norm_squared().max(1.0));
        // Eigenvector is v up to phase.
        prop_assert!((top.vector.dotc(&v).norm() - v.norm()).abs() <= 1e-9 * v.norm());
    }

    #[test]
    fn square_root_round_trips(m in positive_definite()) {
        let root = hermitian_sqrt(&m).unwrap();
        let back = root.as_matrix() * root.as_matrix();
        prop_assert!((back - m.as_matrix()).norm() <= 1e-9 * m.frobenius_norm());
        let inv_root = hermitian_inv_sqrt(&m).unwrap();
        let id = inv_root.as_matrix() * m.as_matrix() * inv_root.as_matrix();
        prop_assert!((id - CMatrix::identity(m.dim(), m.dim())).norm() <= 1e-8);
    }

    #[test]
    fn solve_matches_reference_inverse(m in positive_definite(), seed in any::<u64>()) {
        let n = m.dim();
        let rhs = CVector::from_fn(n, |i, _| Complex64::new((seed.wrapping_add(i as u64) % 7) as f64 - 3.0, 1.0));
        let x = hermitian_solve(&m, &rhs).unwrap();
        let reference = m.as_matrix().clone().try_inverse().unwrap() * &rhs;
        prop_assert!((x - &reference).norm() <= 1e-9 * reference.norm().max(1.0));
    }
}

#[test]
fn non_hermitian_input_is_rejected() {
    let mut m = CMatrix::identity(3, 3);
    m[(0, 2)] = Complex64::new(0.0, 1.0);
    assert!(HermitianMatrix::new(m).is_err());
}

#[test]
fn indefinite_square_root_is_a_domain_error() {
    let m = HermitianMatrix::from_real_diagonal(&[1.0, -0.5]);
    assert!(matches!(hermitian_sqrt(&m), Err(cogbeam::Error::Domain(_))));
}
