mod common;

use common::random_density;
use nalgebra::{DMatrix, DVector};
use tomo_core::estimators::lin_estimate;
use tomo_core::linalg::trace_product;
use tomo_core::pauli::{build_product_pauli_pom, pauli_expectations, pauli_word_matrix, PauliWord};
use tomo_core::sim::{simulate_counts, RunSeed, WeightedCounts};
use tomo_core::states::{born_probabilities, make_state, StateKind, StateSpec};

#[test]
fn all_word_pairs_are_orthogonal() {
    let mats: Vec<_> = (0..256).map(|i| pauli_word_matrix(&PauliWord::from_index(4, i))).collect();
    for (i, a) in mats.iter().enumerate() {
        for (j, b) in mats.iter().enumerate() {
            let t = trace_product(a, b).unwrap();
            let want = if i == j { 16.0 } else { 0.0 };
            assert!((t.re - want).abs() < 1e-12 && t.im.abs() < 1e-12, "{i} {j}");
        }
    }
}

#[test]
fn fast_probabilities_match_born_rule() {
    let pom = build_product_pauli_pom(4).unwrap();
    for seed in 0..5 {
        let rho = random_density(16, 2 + seed as usize, seed);
        let e = pauli_expectations(&rho);
        let mut fast = vec![0.0; 1296];
        pom.probabilities_from_expectations(&e, &mut fast);
        for t in 0..81 {
            let dense = born_probabilities(&rho, &pom, t);
            for k in 0..16 {
                assert!((fast[t * 16 + k] - dense[k]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn compatible_setting_counts() {
    let pom = build_product_pauli_pom(4).unwrap();
    for i in 0..256 {
        let w = PauliWord::from_index(4, i);
        let n_id = 4 - w.weight();
        assert_eq!(pom.compatible(i).len(), 3usize.pow(n_id as u32), "{w}");
        for &(t, _) in pom.compatible(i) {
            assert!(w.is_compatible_with(&pom.setting(t).word));
        }
    }
}

/// Rows: (setting, outcome); columns: Pauli coefficients `e_s` with
/// `p_{t,k} = sum_s e_s tr(sigma_s Pi_{t,k}) / 16`.
fn design_matrix() -> DMatrix<f64> {
    let pom = build_product_pauli_pom(4).unwrap();
    let words: Vec<_> = (0..256).map(|i| pauli_word_matrix(&PauliWord::from_index(4, i))).collect();
    let mut a = DMatrix::zeros(1296, 256);
    for t in 0..81 {
        for k in 0..16 {
            let proj = pom.setting(t).projector(k);
            for (s, w) in words.iter().enumerate() {
                a[(t * 16 + k, s)] = trace_product(w, &proj).unwrap().re / 16.0;
            }
        }
    }
    a
}

#[test]
fn lin_equals_least_squares_solution() {
    let pom = build_product_pauli_pom(4).unwrap();
    let a = design_matrix();
    let svd = a.clone().svd(true, true);
    let rho = make_state(&StateSpec::with_fidelity(StateKind::W4, 0.85)).unwrap();
    for seed in 0..3 {
        let data = simulate_counts(&rho, &pom, 100, RunSeed::new(seed, 0)).unwrap();
        let w = WeightedCounts::from(&data);
        let f = DVector::from_vec(w.frequencies());
        let e_ls = svd.solve(&f, 1e-12).unwrap();
        let lin = lin_estimate(&pom, &w).unwrap();
        for s in 0..256 {
            assert!((lin.pauli_expectations[s] - e_ls[s]).abs() < 1e-8, "word {s}");
        }
        let e_hat = pauli_expectations(&lin.matrix);
        for s in 0..256 {
            assert!((e_hat[s] - e_ls[s]).abs() < 1e-8);
        }
    }
}

#[test]
fn lin_inverts_exact_data() {
    let pom = build_product_pauli_pom(4).unwrap();
    for seed in 0..10 {
        let rho = random_density(16, 1 + seed as usize, 500 + seed);
        let lin = lin_estimate(&pom, &WeightedCounts::exact(&rho, &pom, 100.0)).unwrap();
        assert!(lin.matrix.max_abs_diff(&rho) < 1e-10);
    }
}
