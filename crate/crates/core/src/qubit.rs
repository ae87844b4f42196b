//! Single-qubit physicality constraints on outcome probabilities.
//!
//! Two measurements are covered: the four-outcome tetrahedron (SIC) POM, whose
//! probabilities of a physical state obey `sum p_k^2 <= 1/3`, and the
//! beam-splitter X/Z measurement with four detectors `0, 1, +, -`.

use num_complex::Complex64;

use crate::error::{Result, TomoError};
use crate::linalg::ComplexMatrix;
use crate::pauli::Pauli;

const TOL: f64 = 1e-12;

/// Tetrahedron POM `M_k = (1 + a_k . sigma) / 4`.
#[derive(Debug, Clone)]
pub struct TetrahedronPom {
    pub axes: [[f64; 3]; 4],
    pub outcomes: [ComplexMatrix; 4],
}

pub fn tetrahedron_pom() -> TetrahedronPom {
    let r = 1.0 / 3f64.sqrt();
    let axes = [
        [r, r, r],
        [r, -r, -r],
        [-r, r, -r],
        [-r, -r, r],
    ];
    let outcomes = axes.map(|a| bloch_operator(a).scale(0.25));
    TetrahedronPom { axes, outcomes }
}

/// `1 + a . sigma`.
fn bloch_operator(a: [f64; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(2);
    for (comp, p) in a.iter().zip([Pauli::X, Pauli::Y, Pauli::Z]) {
        m = &m + &p.matrix().scale(*comp);
    }
    m
}

/// Qubit density matrix `(1 + r . sigma) / 2`.
pub fn qubit_state(bloch: [f64; 3]) -> ComplexMatrix {
    bloch_operator(bloch).scale(0.5)
}

impl TetrahedronPom {
    pub fn probabilities(&self, rho: &ComplexMatrix) -> [f64; 4] {
        let mut p = [0.0; 4];
        for (pk, m) in p.iter_mut().zip(&self.outcomes) {
            *pk = crate::linalg::trace_product(rho, m).unwrap().re;
        }
        p
    }

    /// Linear inversion of the tetrahedron Born rule: `rho = sum_k (3 p_k - 1/2) M_k`
    /// written through the Bloch vector `r = 3 sum_k p_k a_k`.
    pub fn invert(&self, p: &[f64; 4]) -> ComplexMatrix {
        let mut r = [0.0; 3];
        for (pk, a) in p.iter().zip(&self.axes) {
            for i in 0..3 {
                r[i] += 3.0 * pk * a[i];
            }
        }
        qubit_state(r)
    }
}

/// Unit sum and `sum p^2 <= 1/3`.
pub fn tetrahedron_physical(p: &[f64; 4]) -> bool {
    let sum: f64 = p.iter().sum();
    let sq: f64 = p.iter().map(|x| x * x).sum();
    (sum - 1.0).abs() <= TOL && sq <= 1.0 / 3.0 + TOL
}

/// `p0 + p1 = p+ + p- = 1/2` and `(p0 - p1)^2 + (p+ - p-)^2 <= 1/4`.
/// Order: `[p0, p1, p+, p-]`.
pub fn bb84_constraints(p: &[f64; 4]) -> bool {
    let z = p[0] + p[1];
    let x = p[2] + p[3];
    let quad = (p[0] - p[1]).powi(2) + (p[2] - p[3]).powi(2);
    (z - 0.5).abs() <= TOL && (x - 0.5).abs() <= TOL && quad <= 0.25 + TOL
}

/// Outcomes of the beam-splitter X/Z measurement, each carrying the factor 1/2.
pub fn bb84_pom() -> [ComplexMatrix; 4] {
    let ket = |p: Pauli, bit| -> Vec<Complex64> { p.eigenket(bit).to_vec() };
    [
        ComplexMatrix::outer(&ket(Pauli::Z, 0)).scale(0.5),
        ComplexMatrix::outer(&ket(Pauli::Z, 1)).scale(0.5),
        ComplexMatrix::outer(&ket(Pauli::X, 0)).scale(0.5),
        ComplexMatrix::outer(&ket(Pauli::X, 1)).scale(0.5),
    ]
}

/// Click counts of the four detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bb84Counts {
    pub n0: u64,
    pub n1: u64,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl Bb84Counts {
    pub fn new(n0: u64, n1: u64, n_plus: u64, n_minus: u64) -> Self {
        Self {
            n0,
            n1,
            n_plus,
            n_minus,
        }
    }
}

/// Replaces `n+` by `n0 + n1 - n-` and the total by `2 (n0 + n1)`, discarding
/// the recorded `n+`. Returns the frequencies `[f0, f1, f+, f-]` and the new total.
pub fn bb84_discard_fix(c: Bb84Counts) -> Result<([f64; 4], u64)> {
    let n01 = c.n0 + c.n1;
    if n01 < c.n_minus {
        return Err(TomoError::NegativePseudoCount {
            n01,
            n_minus: c.n_minus,
        });
    }
    let n_eff = 2 * n01;
    let n_plus = n01 - c.n_minus;
    if n_eff == 0 {
        // n0 = n1 = n- = 0: nothing left to normalize.
        return Err(TomoError::NegativePseudoCount { n01, n_minus: 0 });
    }
    let total = n_eff as f64;
    Ok((
        [
            c.n0 as f64 / total,
            c.n1 as f64 / total,
            n_plus as f64 / total,
            c.n_minus as f64 / total,
        ],
        n_eff,
    ))
}
