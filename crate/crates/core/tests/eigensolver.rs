//! Dense symmetric eigensolver against nalgebra and the spectral theorem.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use trilevel::linalg::{eigensolve_symmetric, lanczos_lowest, DenseMatrix, LanczosOptions, SparseSymmetric};
use trilevel::{build_block_hamiltonian, AtomConfig, Couplings, Detunings, Error, ModelParams};

fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn eigenvalues_match_nalgebra(n in 1usize..40, seed in any::<u64>()) {
        let a = random_symmetric(n, seed);
        let eig = eigensolve_symmetric(&a).unwrap();
        let reference = DMatrix::from_fn(n, n, |i, j| a.get(i, j)).symmetric_eigen();
        let mut expected: Vec<f64> = reference.eigenvalues.iter().copied().collect();
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let scale = a.frobenius_norm().max(1.0);
        for (got, want) in eig.values.iter().zip(&expected) {
            prop_assert!((got - want).abs() <= 1e-10 * scale);
        }
        for k in 0..n {
            let v = eig.vector(k);
            let av = a.matvec(&v);
            let residual: f64 = av.iter().zip(&v).map(|(x, y)| (x - eig.values[k] * y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(residual <= 1e-10 * scale);
            let (big, _) = v.iter().enumerate().fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
            prop_assert!(v[big] > 0.0);
        }
    }
}

#[test]
fn reconstruction_of_random_50_by_50() {
    let a = random_symmetric(50, 2024);
    let eig = eigensolve_symmetric(&a).unwrap();
    let vectors: Vec<Vec<f64>> = (0..50).map(|k| eig.vector(k)).collect();
    let mut err = 0.0;
    for i in 0..50 {
        for j in 0..50 {
            let r: f64 = (0..50).map(|k| vectors[k][i] * eig.values[k] * vectors[k][j]).sum();
            err += (a.get(i, j) - r).powi(2);
        }
    }
    assert!(err.sqrt() <= 1e-9 * a.frobenius_norm());
    for w in eig.values.windows(2) {
        assert!(w[0] <= w[1]);
    }
}

#[test]
fn non_symmetric_input_is_rejected() {
    let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
    assert!(matches!(eigensolve_symmetric(&a), Err(Error::NotSymmetric(_))));
}

#[test]
fn ladder_single_excitation_block() {
    for mu12 in [0.2, 0.9, 1.6] {
        let p = ModelParams::from_detunings(AtomConfig::Xi, Detunings(0.0, 0.0), Couplings::new(mu12, 0.0, 0.5), 4).unwrap();
        let h = build_block_hamiltonian(&p, AtomConfig::Xi, 1).unwrap();
        let eig = eigensolve_symmetric(&h.dense()).unwrap();
        assert!((eig.values[0] - (1.0 - mu12)).abs() < 1e-12);
        assert!((eig.values[1] - (1.0 + mu12)).abs() < 1e-12);
    }
}

#[test]
fn lanczos_matches_dense_on_physical_blocks() {
    for (config, d) in [(AtomConfig::Xi, (0.1, 0.2)), (AtomConfig::Lambda, (0.3, -0.2)), (AtomConfig::V, (0.2, 0.3))] {
        let p = ModelParams::from_detunings(config, Detunings(d.0, d.1), Couplings::for_config(config, 1.7, 2.3), 20).unwrap();
        for m in [5, 25, 60] {
            let h = build_block_hamiltonian(&p, config, m).unwrap();
            let dense = eigensolve_symmetric(&h.dense()).unwrap().values[0];
            let fast = lanczos_lowest(&h.matrix, LanczosOptions::default()).unwrap().value;
            assert!((dense - fast).abs() <= 1e-9 * h.matrix.frobenius_norm(), "{config} M={m}");
        }
    }
    let path = SparseSymmetric::new(vec![0.0; 3], vec![(1, 0, -1.0), (2, 1, -1.0)]);
    let low = lanczos_lowest(&path, LanczosOptions::default()).unwrap();
    assert!((low.value + 2f64.sqrt()).abs() < 1e-12);
}
