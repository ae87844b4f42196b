mod common;

use proptest::prelude::*;
use rand::Rng;
use tomo_core::linalg::trace_product;
use tomo_core::qubit::{
    bb84_constraints, bb84_discard_fix, bb84_pom, qubit_state, tetrahedron_physical, tetrahedron_pom, Bb84Counts,
};

/// Uniform in the Bloch ball.
fn random_bloch(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if v.iter().map(|x: &f64| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

#[test]
fn random_qubits_satisfy_both_constraint_sets() {
    let tet = tetrahedron_pom();
    let bb = bb84_pom();
    let mut rng = common::rng(10);
    for i in 0..10_000 {
        let mut r = random_bloch(&mut rng);
        if i % 4 == 0 {
            // push a quarter of the samples onto the surface
            let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            r = r.map(|x| x / n);
        }
        let rho = qubit_state(r);
        let p = tet.probabilities(&rho);
        assert!(p.iter().map(|x| x * x).sum::<f64>() <= 1.0 / 3.0 + 1e-12);
        assert!(tetrahedron_physical(&p));
        let q = bb.clone().map(|m| trace_product(&rho, &m).unwrap().re);
        assert!(bb84_constraints(&q), "{q:?}");
    }
}

#[test]
fn tetrahedron_rejects_states_outside_the_ball() {
    let tet = tetrahedron_pom();
    for axis in tet.axes {
        let p = tet.probabilities(&qubit_state(axis.map(|x| 1.01 * x)));
        assert!(!tetrahedron_physical(&p));
    }
}

#[test]
fn orthogonal_leg_needs_counts_divisible_by_three() {
    // True state along -a_1: p = (0, 1/3, 1/3, 1/3), so outcome 1 never fires.
    for n in 1..=20u32 {
        let mut physical = 0;
        for n2 in 0..=n {
            for n3 in 0..=n - n2 {
                let n4 = n - n2 - n3;
                let f = [0, n2, n3, n4].map(|c| f64::from(c) / f64::from(n));
                if tetrahedron_physical(&f) {
                    physical += 1;
                }
            }
        }
        let want = if n % 3 == 0 { 1 } else { 0 };
        assert_eq!(physical, want, "N = {n}");
    }
}

#[test]
fn discard_fix_linear_constraints_exhaustive() {
    for n in 0..=20u64 {
        for n0 in 0..=n {
            for n1 in 0..=n - n0 {
                for np in 0..=n - n0 - n1 {
                    let nm = n - n0 - n1 - np;
                    match bb84_discard_fix(Bb84Counts::new(n0, n1, np, nm)) {
                        Ok((f, n_eff)) => {
                            assert_eq!(n_eff, 2 * (n0 + n1));
                            assert_eq!(f[0] + f[1], 0.5);
                            assert_eq!(f[2] + f[3], 0.5);
                        }
                        Err(_) => assert!(n0 + n1 < nm || n0 + n1 == 0),
                    }
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn discard_fix_restores_linear_constraints(n0 in 0u64..10_000, n1 in 0u64..10_000, np in 0u64..10_000, nm in 0u64..10_000) {
        prop_assume!(n0 + n1 >= nm && n0 + n1 > 0);
        let (f, _) = bb84_discard_fix(Bb84Counts::new(n0, n1, np, nm)).unwrap();
        prop_assert!((f[0] + f[1] - 0.5).abs() <= 1e-15);
        prop_assert!((f[2] + f[3] - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn tetrahedron_inversion_round_trips(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let pom = tetrahedron_pom();
        let rho = qubit_state([x, y, z]);
        prop_assert!(pom.invert(&pom.probabilities(&rho)).max_abs_diff(&rho) < 1e-14);
    }
}
