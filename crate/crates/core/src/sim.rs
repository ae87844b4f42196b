//! Simulated product-Pauli data: every setting gets the same number of copies
//! and its outcome counts are one multinomial draw.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Result, TomoError};
use crate::linalg::ComplexMatrix;
use crate::pauli::PauliPom;
use crate::states::{born_probabilities, check_physical};

/// Identifies one run's private random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeed {
    pub master_seed: u64,
    pub run_index: u64,
}

impl RunSeed {
    pub fn new(master_seed: u64, run_index: u64) -> Self {
        Self {
            master_seed,
            run_index,
        }
    }

    /// 64-bit substream key, a pure function of `(master_seed, run_index)`.
    pub fn substream(&self) -> u64 {
        splitmix64(splitmix64(self.master_seed) ^ self.run_index.wrapping_mul(0xD1B5_4A32_D192_ED03))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.substream())
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Click counts for every setting, setting-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountDataset {
    num_qubits: usize,
    copies_per_setting: u64,
    counts: Vec<u64>,
}

impl CountDataset {
    /// Validates that every setting's counts sum to `copies_per_setting`.
    pub fn new(pom: &PauliPom, copies_per_setting: u64, counts: Vec<u64>) -> Result<Self> {
        let d = pom.dim();
        let expected = pom.settings().len() * d;
        if counts.len() != expected {
            return Err(TomoError::DimensionMismatch {
                expected,
                found: counts.len(),
            });
        }
        if copies_per_setting == 0 {
            return Err(TomoError::Config("copies_per_setting must be positive".into()));
        }
        for (t, block) in counts.chunks_exact(d).enumerate() {
            let sum: u64 = block.iter().sum();
            if sum != copies_per_setting {
                return Err(TomoError::Config(format!(
                    "setting {t} has {sum} counts, expected {copies_per_setting}"
                )));
            }
        }
        Ok(Self {
            num_qubits: pom.num_qubits(),
            copies_per_setting,
            counts,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn copies_per_setting(&self) -> u64 {
        self.copies_per_setting
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn setting_counts(&self, t: usize) -> &[u64] {
        let d = 1 << self.num_qubits;
        &self.counts[t * d..(t + 1) * d]
    }

    pub fn num_settings(&self) -> usize {
        self.counts.len() >> self.num_qubits
    }

    pub fn total(&self) -> u64 {
        self.copies_per_setting * self.num_settings() as u64
    }

    /// `setting,outcome,count` CSV with one row per (setting, outcome).
    pub fn to_csv(&self, pom: &PauliPom) -> String {
        let d = pom.dim();
        let mut s = String::from("setting,outcome,count\n");
        for (t, setting) in pom.settings().iter().enumerate() {
            for k in 0..d {
                let _ = writeln!(
                    s,
                    "{},{},{}",
                    setting.word,
                    pom.outcome_label(k),
                    self.counts[t * d + k]
                );
            }
        }
        s
    }

    pub fn write_csv(&self, pom: &PauliPom, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv(pom))?;
        Ok(())
    }
}

/// Draws one multinomial sample per setting from the Born distribution of `rho`.
pub fn simulate_counts(
    rho: &ComplexMatrix,
    pom: &PauliPom,
    copies_per_setting: u64,
    seed: RunSeed,
) -> Result<CountDataset> {
    check_physical(rho)?;
    if rho.dim() != pom.dim() {
        return Err(TomoError::DimensionMismatch {
            expected: pom.dim(),
            found: rho.dim(),
        });
    }
    let mut rng = seed.rng();
    let mut counts = Vec::with_capacity(pom.settings().len() * pom.dim());
    for t in 0..pom.settings().len() {
        let probs = born_probabilities(rho, pom, t);
        sample_multinomial(&mut rng, copies_per_setting, &probs, &mut counts);
    }
    CountDataset::new(pom, copies_per_setting, counts)
}

/// Sequential conditional binomials; appends one count per probability.
pub fn sample_multinomial<R: rand::Rng>(rng: &mut R, trials: u64, probs: &[f64], out: &mut Vec<u64>) {
    let mut remaining = trials;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let last = probs.len() - 1;
    for (k, &p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        let n = if k == last {
            remaining
        } else if remaining == 0 || p == 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            if q >= 1.0 {
                remaining
            } else {
                Binomial::new(remaining, q).unwrap().sample(rng)
            }
        };
        out.push(n);
        remaining -= n;
        mass -= p;
    }
}

/// `f_{t,k} = n_{t,k} / copies`, setting-major.
pub fn relative_frequencies(data: &CountDataset) -> Vec<f64> {
    let c = data.copies_per_setting() as f64;
    data.counts().iter().map(|&n| n as f64 / c).collect()
}

/// Real-valued outcome weights `n_{t,k}`, setting-major. Simulated data has
/// integral weights; exact pseudo-data uses `copies * p_{t,k}` directly.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCounts {
    num_qubits: usize,
    per_setting: f64,
    weights: Vec<f64>,
}

impl WeightedCounts {
    /// Pseudo-data whose frequencies are the Born probabilities of `rho`.
    pub fn exact(rho: &ComplexMatrix, pom: &PauliPom, copies_per_setting: f64) -> Self {
        let weights = (0..pom.settings().len())
            .flat_map(|t| born_probabilities(rho, pom, t))
            .map(|p| p.max(0.0) * copies_per_setting)
            .collect();
        Self {
            num_qubits: pom.num_qubits(),
            per_setting: copies_per_setting,
            weights,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn per_setting(&self) -> f64 {
        self.per_setting
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `n_{t,k} / copies`, setting-major.
    pub fn frequencies(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.per_setting).collect()
    }
}

impl From<&CountDataset> for WeightedCounts {
    fn from(data: &CountDataset) -> Self {
        Self {
            num_qubits: data.num_qubits,
            per_setting: data.copies_per_setting as f64,
            weights: data.counts.iter().map(|&n| n as f64).collect(),
        }
    }
}
