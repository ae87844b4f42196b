//! Fidelity, purity, and bias/variance/MSE aggregation of per-run fidelities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::linalg::{eig_hermitian, ComplexMatrix, PSD_CLIP};
use crate::states::PHYSICAL_TOL;

/// Default histogram bin width.
pub const DEFAULT_BIN_WIDTH: f64 = 0.002;

/// `<psi| rho_hat |psi>`. Defined for any Hermitian `rho_hat`, physical or not.
pub fn fidelity_pure(psi: &[Complex64], rho_hat: &ComplexMatrix) -> f64 {
    rho_hat.expectation(psi).re
}

/// Square root of an eigenvalue, with eigenvalues at the rounding level of the
/// decomposition treated as zero. Without this, a rank-deficient argument
/// picks up `sqrt(1e-17)`-sized contributions from its null space.
fn rounded_sqrt(x: f64, scale: f64, dim: usize) -> f64 {
    if x <= 4.0 * dim as f64 * f64::EPSILON * scale {
        0.0
    } else {
        x.sqrt()
    }
}

/// `(tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`. Both arguments must be PSD up
/// to the clipping window.
pub fn fidelity_uhlmann(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<f64> {
    let d = rho1.dim();
    let es1 = eig_hermitian(rho1)?;
    let es2 = eig_hermitian(rho2)?;
    for es in [&es1, &es2] {
        if es.min() < -PSD_CLIP {
            return Err(TomoError::NotPositiveSemidefinite {
                min_eigenvalue: es.min(),
            });
        }
    }
    let scale1 = es1.max().abs();
    let s1 = es1.reconstruct_with(|x| rounded_sqrt(x, scale1, d));
    let inner = s1.matmul(rho2).matmul(&s1).hermitian_part();
    let es = eig_hermitian(&inner)?;
    let scale = es.max().abs();
    let root_trace: f64 = es.eigenvalues.iter().map(|&x| rounded_sqrt(x, scale, d)).sum();
    Ok(root_trace * root_trace)
}

/// `tr(rho^2)`, with a flag set when the matrix has a negative eigenvalue and
/// the number therefore is not a purity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Purity {
    pub value: f64,
    pub interpretable: bool,
}

pub fn purity(rho_hat: &ComplexMatrix) -> Result<Purity> {
    let value = rho_hat.frobenius_sq();
    let min = eig_hermitian(rho_hat)?.min();
    Ok(Purity {
        value,
        interpretable: min >= -PHYSICAL_TOL,
    })
}

/// Summary of one estimator's fidelities against the true value `F0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub runs: usize,
    pub mean: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub mse: f64,
    pub frac_above_one: f64,
    pub frac_below_zero: f64,
    pub frac_nonphysical_estimates: f64,
}

impl ScenarioStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Mean, squared bias, population variance and MSE of `samples` about `f0`.
///
/// `variance` is defined as `mse - bias_sq` so the decomposition holds to the
/// last bit; it equals the population variance up to rounding.
pub fn aggregate(samples: &[f64], f0: f64) -> Result<ScenarioStats> {
    if samples.len() < 2 {
        return Err(TomoError::TooFewSamples(samples.len()));
    }
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    let mse = samples.iter().map(|x| (x - f0).powi(2)).sum::<f64>() / r;
    let bias_sq = (mean - f0).powi(2);
    let variance = mse - bias_sq;
    let frac = |pred: &dyn Fn(f64) -> bool| samples.iter().filter(|&&x| pred(x)).count() as f64 / r;
    Ok(ScenarioStats {
        runs: samples.len(),
        mean,
        bias_sq,
        variance,
        mse,
        frac_above_one: frac(&|x| x > 1.0),
        frac_below_zero: frac(&|x| x < 0.0),
        frac_nonphysical_estimates: 0.0,
    })
}

/// Same as [`aggregate`], also recording which estimates were unphysical.
pub fn aggregate_with_physicality(samples: &[f64], f0: f64, nonphysical: &[bool]) -> Result<ScenarioStats> {
    let mut stats = aggregate(samples, f0)?;
    stats.frac_nonphysical_estimates =
        nonphysical.iter().filter(|&&b| b).count() as f64 / nonphysical.len().max(1) as f64;
    Ok(stats)
}

/// Index of the bin `[i w, (i+1) w)` holding `x`.
pub fn bin_index(x: f64, bin_width: f64) -> i64 {
    (x / bin_width).floor() as i64
}

/// Fixed-width histogram with bins aligned to multiples of `bin_width`,
/// covering `min..=max` of the samples. Empty interior bins are kept.
pub fn histogram(samples: &[f64], bin_width: f64) -> Vec<(f64, usize)> {
    assert!(bin_width > 0.0, "bin width must be positive");
    if samples.is_empty() {
        return Vec::new();
    }
    let idx: Vec<i64> = samples.iter().map(|&x| bin_index(x, bin_width)).collect();
    let lo = *idx.iter().min().unwrap();
    let hi = *idx.iter().max().unwrap();
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for i in idx {
        counts[(i - lo) as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(j, c)| ((lo + j as i64) as f64 * bin_width, c))
        .collect()
}

/// Two sample sets binned on a shared grid: `(bin_left, count_a, count_b)`.
pub fn joint_histogram(a: &[f64], b: &[f64], bin_width: f64) -> Vec<(f64, usize, usize)> {
    assert!(bin_width > 0.0, "bin width must be positive");
    let all: Vec<i64> = a.iter().chain(b).map(|&x| bin_index(x, bin_width)).collect();
    let (Some(&lo), Some(&hi)) = (all.iter().min(), all.iter().max()) else {
        return Vec::new();
    };
    let len = (hi - lo + 1) as usize;
    let mut ca = vec![0usize; len];
    let mut cb = vec![0usize; len];
    for &x in a {
        ca[(bin_index(x, bin_width) - lo) as usize] += 1;
    }
    for &x in b {
        cb[(bin_index(x, bin_width) - lo) as usize] += 1;
    }
    (0..len)
        .map(|j| ((lo + j as i64) as f64 * bin_width, ca[j], cb[j]))
        .collect()
}
