//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Every export returns a JSON string so the page needs no glue beyond
//! `JSON.parse`. Errors come back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use tomo_core::estimators::{lin_estimate, mle_estimate, MleOptions};
use tomo_core::harness::{parse_target, run_scenario, Estimator, ScenarioConfig};
use tomo_core::linalg::eig_hermitian;
use tomo_core::metrics::{fidelity_pure, joint_histogram, ScenarioStats};
use tomo_core::pauli::build_product_pauli_pom;
use tomo_core::qubit::{
    bb84_constraints, bb84_discard_fix, qubit_state, tetrahedron_physical, tetrahedron_pom, Bb84Counts,
};
use tomo_core::sim::{simulate_counts, RunSeed, WeightedCounts};
use tomo_core::states::{base_ket, make_state, StateSpec};
use tomo_core::Result;

/// Runs are capped to keep the page responsive; MLE costs ~0.1 s per run.
pub const MAX_RUNS: u32 = 200;

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn true_spec(target: &str, target_seed: u32, true_fidelity: f64) -> Result<(ScenarioConfig, StateSpec)> {
    let kind = parse_target(target, u64::from(target_seed))?;
    let spec = if true_fidelity >= 1.0 {
        StateSpec::pure(kind.clone())
    } else {
        StateSpec::with_fidelity(kind.clone(), true_fidelity)
    };
    let cfg = ScenarioConfig {
        target: kind,
        true_state: spec.clone(),
        ..ScenarioConfig::default()
    };
    Ok((cfg, spec))
}

#[derive(Serialize)]
struct HistogramReport {
    f0: f64,
    lin: ScenarioStats,
    mle: ScenarioStats,
    /// `[bin_left, count_lin, count_mle]`
    bins: Vec<(f64, usize, usize)>,
}

/// Simulates `runs` experiments and returns both estimators' fidelity
/// statistics and a joint histogram.
#[wasm_bindgen]
pub fn fidelity_histogram(
    target: &str,
    target_seed: u32,
    true_fidelity: f64,
    runs: u32,
    copies_per_setting: u32,
    seed: u32,
    bin_width: f64,
) -> String {
    to_json((|| {
        let (mut cfg, _) = true_spec(target, target_seed, true_fidelity)?;
        cfg.runs = runs.clamp(2, MAX_RUNS) as usize;
        cfg.copies_per_setting = u64::from(copies_per_setting);
        cfg.master_seed = u64::from(seed);
        cfg.bin_width = bin_width;
        cfg.workers = 1;
        let res = run_scenario(&cfg)?;
        let lin = res.fidelities(Estimator::Lin);
        let mle = res.fidelities(Estimator::Mle);
        Ok(HistogramReport {
            f0: res.f0,
            lin: res.summaries[&Estimator::Lin].stats.clone(),
            mle: res.summaries[&Estimator::Mle].stats.clone(),
            bins: joint_histogram(&lin, &mle, bin_width),
        })
    })())
}

#[derive(Serialize)]
struct SpectrumReport {
    f0: f64,
    true_eigenvalues: Vec<f64>,
    lin_eigenvalues: Vec<f64>,
    mle_eigenvalues: Vec<f64>,
    lin_fidelity: f64,
    mle_fidelity: f64,
    mle_iterations: usize,
}

/// Eigenvalues of the true state and of both estimates from one simulated run.
#[wasm_bindgen]
pub fn single_run_spectrum(target: &str, target_seed: u32, true_fidelity: f64, copies_per_setting: u32, seed: u32) -> String {
    to_json((|| {
        let (cfg, spec) = true_spec(target, target_seed, true_fidelity)?;
        let pom = build_product_pauli_pom(4)?;
        let psi = base_ket(&cfg.target)?;
        let rho = make_state(&spec)?;
        let data = simulate_counts(&rho, &pom, u64::from(copies_per_setting), RunSeed::new(u64::from(seed), 0))?;
        let w = WeightedCounts::from(&data);
        let lin = lin_estimate(&pom, &w)?;
        let mle = mle_estimate(&pom, &w, &MleOptions::default())?;
        Ok(SpectrumReport {
            f0: fidelity_pure(&psi, &rho),
            true_eigenvalues: eig_hermitian(&rho)?.eigenvalues,
            lin_eigenvalues: eig_hermitian(&lin.matrix)?.eigenvalues,
            mle_eigenvalues: eig_hermitian(&mle.matrix)?.eigenvalues,
            lin_fidelity: fidelity_pure(&psi, &lin.matrix),
            mle_fidelity: fidelity_pure(&psi, &mle.matrix),
            mle_iterations: mle.iterations,
        })
    })())
}

#[derive(Serialize)]
struct QubitReport {
    /// Tetrahedron probabilities of the Bloch vector.
    probabilities: [f64; 4],
    sum_sq: f64,
    physical: bool,
}

/// Tetrahedron probabilities of the qubit with Bloch vector `(x, y, z)`;
/// vectors longer than 1 give unphysical probabilities.
#[wasm_bindgen]
pub fn tetrahedron_check(x: f64, y: f64, z: f64) -> String {
    let p = tetrahedron_pom().probabilities(&qubit_state([x, y, z]));
    to_json(Ok(QubitReport {
        probabilities: p,
        sum_sq: p.iter().map(|v| v * v).sum(),
        physical: tetrahedron_physical(&p),
    }))
}

#[derive(Serialize)]
struct Bb84Report {
    frequencies: [f64; 4],
    effective_total: u64,
    /// `(f0 - f1)^2 + (f+ - f-)^2`, at most 1/4 when physical.
    quadratic: f64,
    physical: bool,
}

/// Applies the discard fix to detector counts and checks the result.
#[wasm_bindgen]
pub fn bb84_check(n0: u32, n1: u32, n_plus: u32, n_minus: u32) -> String {
    to_json((|| {
        let counts = Bb84Counts::new(n0.into(), n1.into(), n_plus.into(), n_minus.into());
        let (f, n_eff) = bb84_discard_fix(counts)?;
        Ok(Bb84Report {
            frequencies: f,
            effective_total: n_eff,
            quadratic: (f[0] - f[1]).powi(2) + (f[2] - f[3]).powi(2),
            physical: bb84_constraints(&f),
        })
    })())
}
