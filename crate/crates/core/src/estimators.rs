//! State estimators for product-Pauli data.
//!
//! * Linear inversion: each Pauli expectation is estimated from outcome signs,
//!   averaged uniformly over every setting that measures it, and the Born rule
//!   is inverted in the Pauli basis. The result has unit trace but can have
//!   negative eigenvalues.
//! * Maximum likelihood: the `R rho R` fixed-point iteration started from the
//!   maximally mixed state, with a diluted step `M rho M`, `M = (1-eps) + eps R`,
//!   whenever the plain step would lower the likelihood.
//!
//! The iteration runs entirely in the Pauli basis: Born probabilities and the
//! `R` operator of all `3^n * 2^n` outcomes come out of Walsh-Hadamard
//! transforms instead of per-projector matrix products.

use crate::error::{Result, TomoError};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::pauli::{from_pauli_expectations, pauli_expectations, walsh_hadamard, PauliPom};
use crate::sim::WeightedCounts;
use crate::states::born_probabilities;

/// Probabilities below this are floored inside the likelihood and `R`.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

fn check_data(pom: &PauliPom, data: &WeightedCounts) -> Result<()> {
    let expected = pom.settings().len() * pom.dim();
    if data.num_qubits() != pom.num_qubits() || data.weights().len() != expected {
        return Err(TomoError::DimensionMismatch {
            expected,
            found: data.weights().len(),
        });
    }
    Ok(())
}

/// Frequency estimates `e_s` of all Pauli expectations, indexed by word.
///
/// The identity word is pinned to 1; every other word is the mean of its
/// sign-weighted frequency sums over all compatible settings.
pub fn pauli_expectation_estimates(pom: &PauliPom, data: &WeightedCounts) -> Result<Vec<f64>> {
    check_data(pom, data)?;
    let d = pom.dim();
    let freqs = data.frequencies();
    let mut sums = vec![0.0; pom.num_words()];
    let mut block = vec![0.0; d];
    for (t, setting) in pom.settings().iter().enumerate() {
        block.copy_from_slice(&freqs[t * d..(t + 1) * d]);
        walsh_hadamard(&mut block);
        for (mask, &v) in block.iter().enumerate() {
            sums[setting.subword(mask)] += v;
        }
    }
    let mut est: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(s, &sum)| sum / pom.compatible(s).len() as f64)
        .collect();
    est[0] = 1.0;
    Ok(est)
}

#[derive(Debug, Clone)]
pub struct LinEstimate {
    pub matrix: ComplexMatrix,
    pub min_eig: f64,
    pub pauli_expectations: Vec<f64>,
}

/// `2^-n sum_s e_s sigma_s` from the frequency estimates.
pub fn lin_estimate(pom: &PauliPom, data: &WeightedCounts) -> Result<LinEstimate> {
    let e = pauli_expectation_estimates(pom, data)?;
    let matrix = from_pauli_expectations(pom.num_qubits(), &e);
    let min_eig = eig_hermitian(&matrix)?.min();
    Ok(LinEstimate {
        matrix,
        min_eig,
        pauli_expectations: e,
    })
}

/// Log-likelihood `sum n log p` (conditional per-setting probabilities) and a
/// flag set when some observed outcome had probability below the floor.
pub fn log_likelihood(pom: &PauliPom, rho: &ComplexMatrix, data: &WeightedCounts) -> Result<(f64, bool)> {
    check_data(pom, data)?;
    let d = pom.dim();
    let mut ll = 0.0;
    let mut floored = false;
    for t in 0..pom.settings().len() {
        let probs = born_probabilities(rho, pom, t);
        for (k, p) in probs.into_iter().enumerate() {
            let n = data.weights()[t * d + k];
            if n > 0.0 {
                if p < PROBABILITY_FLOOR {
                    floored = true;
                }
                ll += n * p.max(PROBABILITY_FLOOR).ln();
            }
        }
    }
    Ok((ll, floored))
}

/// `R = N^-1 sum_{n>0} n |v><v| / p`, built projector by projector.
pub fn r_operator(pom: &PauliPom, rho: &ComplexMatrix, data: &WeightedCounts) -> Result<(ComplexMatrix, bool)> {
    check_data(pom, data)?;
    let d = pom.dim();
    let total = data.total();
    let mut r = ComplexMatrix::zeros(d);
    let mut floored = false;
    for (t, setting) in pom.settings().iter().enumerate() {
        let probs = born_probabilities(rho, pom, t);
        for (k, ket) in setting.kets().iter().enumerate() {
            let n = data.weights()[t * d + k];
            if n <= 0.0 {
                continue;
            }
            if probs[k] < PROBABILITY_FLOOR {
                floored = true;
            }
            let w = n / (total * probs[k].max(PROBABILITY_FLOOR));
            for i in 0..d {
                let vi = ket[i] * w;
                for j in 0..d {
                    r[(i, j)] += vi * ket[j].conj();
                }
            }
        }
    }
    Ok((r, floored))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Stop once the log-likelihood gain of a step drops below this and the
    /// optimality certificate holds.
    pub tol: f64,
    pub max_iter: usize,
    /// First dilution weight tried after a rejected step; halved until accepted.
    pub epsilon: f64,
    /// Required `lambda_max(R) - 1` for convergence.
    pub gap_tol: f64,
    pub record_trace: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 20_000,
            epsilon: 0.5,
            gap_tol: 1e-6,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleEstimate {
    pub matrix: ComplexMatrix,
    pub iterations: usize,
    pub final_log_likelihood: f64,
    /// The optimality certificate `optimality_gap <= gap_tol` holds.
    pub converged: bool,
    /// `lambda_max(R(rho)) - 1`; zero at the maximizer.
    pub optimality_gap: f64,
    /// Some observed outcome hit the probability floor.
    pub boundary_warning: bool,
    /// Number of steps that needed dilution.
    pub diluted_steps: usize,
    /// Log-likelihood after every accepted step, if requested.
    pub trace: Vec<f64>,
}

/// Working state of the iteration: the iterate and its outcome probabilities.
struct Iterate {
    rho: ComplexMatrix,
    probs: Vec<f64>,
    loglik: f64,
    floored: bool,
}

struct MleWorkspace<'a> {
    pom: &'a PauliPom,
    weights: &'a [f64],
    total: f64,
    scratch: Vec<f64>,
    rweights: Vec<f64>,
    dprobs: Vec<f64>,
}

impl<'a> MleWorkspace<'a> {
    fn evaluate(&self, rho: ComplexMatrix) -> Iterate {
        let e = pauli_expectations(&rho);
        let mut probs = vec![0.0; self.weights.len()];
        self.pom.probabilities_from_expectations(&e, &mut probs);
        let mut loglik = 0.0;
        let mut floored = false;
        for (&n, &p) in self.weights.iter().zip(&probs) {
            if n > 0.0 {
                if p < PROBABILITY_FLOOR {
                    floored = true;
                }
                loglik += n * p.max(PROBABILITY_FLOOR).ln();
            }
        }
        Iterate {
            rho,
            probs,
            loglik,
            floored,
        }
    }

    /// `l(to) - l(from)`, from the probability changes of `to - from`
    /// computed directly, so that gains far below the rounding level of `l`
    /// (and of the probabilities themselves) are still resolved.
    fn gain(&mut self, from: &Iterate, to: &Iterate) -> f64 {
        let mut delta = pauli_expectations(&(&to.rho - &from.rho));
        // Both iterates have unit trace; any identity component is rounding,
        // and weighted by N it would swamp gains near the optimum.
        delta[0] = 0.0;
        self.pom.probabilities_from_expectations(&delta, &mut self.dprobs);
        self.weights
            .iter()
            .zip(&from.probs)
            .zip(&to.probs)
            .zip(&self.dprobs)
            .filter(|(((&n, _), _), _)| n > 0.0)
            .map(|(((&n, &p), &q), &dp)| {
                if p >= PROBABILITY_FLOOR && q >= PROBABILITY_FLOOR {
                    n * (dp / p).ln_1p()
                } else {
                    n * (q.max(PROBABILITY_FLOOR) / p.max(PROBABILITY_FLOOR)).ln()
                }
            })
            .sum()
    }

    fn r_operator(&mut self, it: &Iterate) -> ComplexMatrix {
        for ((rw, &n), &p) in self.rweights.iter_mut().zip(self.weights).zip(&it.probs) {
            *rw = if n > 0.0 {
                n / (self.total * p.max(PROBABILITY_FLOOR))
            } else {
                0.0
            };
        }
        let c = self
            .pom
            .expectations_of_weighted_sum(&self.rweights, &mut self.scratch);
        from_pauli_expectations(self.pom.num_qubits(), &c).hermitian_part()
    }
}

/// `M rho M / tr(M rho M)`, re-symmetrized.
fn sandwich(m: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let out = m.matmul(rho).matmul(m);
    let tr = out.trace().re;
    out.scale(1.0 / tr).hermitian_part()
}

fn diluted(r: &ComplexMatrix, eps: f64) -> ComplexMatrix {
    &ComplexMatrix::identity(r.dim()).scale(1.0 - eps) + &r.scale(eps)
}

/// Maximum-likelihood estimate over physical states.
pub fn mle_estimate(pom: &PauliPom, data: &WeightedCounts, opts: &MleOptions) -> Result<MleEstimate> {
    check_data(pom, data)?;
    let d = pom.dim();
    let total = data.total();
    if total <= 0.0 {
        return Err(TomoError::Config("dataset has no counts".into()));
    }
    let mut ws = MleWorkspace {
        pom,
        weights: data.weights(),
        total,
        scratch: vec![0.0; d],
        rweights: vec![0.0; data.weights().len()],
        dprobs: vec![0.0; data.weights().len()],
    };

    let mut current = ws.evaluate(ComplexMatrix::identity(d).scale(1.0 / d as f64));
    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(current.loglik);
    }
    let mut iterations = 0;
    let mut diluted_steps = 0;
    let mut last_gain = f64::INFINITY;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    let mut since_check = usize::MAX;

    loop {
        let r = ws.r_operator(&current);
        if last_gain < opts.tol {
            // Certificate checks cost an eigendecomposition; space them out
            // while progress is slow.
            if since_check >= 10 {
                gap = eig_hermitian(&r)?.max() - 1.0;
                since_check = 0;
                if gap <= opts.gap_tol {
                    converged = true;
                    break;
                }
            }
            since_check += 1;
        }
        if iterations >= opts.max_iter {
            break;
        }

        let mut next = ws.evaluate(sandwich(&r, &current.rho));
        let mut gain = ws.gain(&current, &next);
        if gain < 0.0 {
            let mut eps = opts.epsilon;
            let mut accepted = false;
            while eps > 1e-16 {
                let cand = ws.evaluate(sandwich(&diluted(&r, eps), &current.rho));
                let g = ws.gain(&current, &cand);
                if g > 0.0 {
                    next = cand;
                    gain = g;
                    accepted = true;
                    break;
                }
                eps *= 0.5;
            }
            if !accepted {
                // No direction improves beyond rounding: numerical optimum.
                break;
            }
            diluted_steps += 1;
        }
        // Accumulate so the reported likelihood is monotone by construction.
        next.loglik = current.loglik + gain;
        last_gain = gain;
        current = next;
        iterations += 1;
        if opts.record_trace {
            trace.push(current.loglik);
        }
    }

    if !converged {
        let r = ws.r_operator(&current);
        gap = eig_hermitian(&r)?.max() - 1.0;
        // Near rank-deficient maximizers the likelihood creeps up by more
        // than `tol` per step for a long time; the certificate still tells
        // whether the iterate has arrived.
        converged = gap <= opts.gap_tol;
    }

    Ok(MleEstimate {
        iterations,
        final_log_likelihood: current.loglik,
        converged,
        optimality_gap: gap,
        boundary_warning: current.floored,
        diluted_steps,
        trace,
        matrix: current.rho,
    })
}
