//! Pauli words and the product-Pauli measurement.
//!
//! Qubit 0 is the leftmost letter of a word and the most significant bit of a
//! computational-basis index. Outcome bit 0 on a qubit means eigenvalue +1 of
//! that qubit's Pauli. Word indices are base-4 with `I=0, X=1, Y=2, Z=3`;
//! setting indices are base-3 over `X, Y, Z`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Result, TomoError};
use crate::linalg::{kron, ComplexMatrix};

pub const MAX_QUBITS: usize = 5;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const MEASURED: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i]
    }

    pub fn matrix(self) -> ComplexMatrix {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => vec![o, z, z, o],
            Pauli::X => vec![z, o, o, z],
            Pauli::Y => vec![z, -i, i, z],
            Pauli::Z => vec![o, z, z, -o],
        };
        ComplexMatrix::from_row_major(2, data).unwrap()
    }

    /// Eigenket for eigenvalue `+1` (bit 0) or `-1` (bit 1).
    pub fn eigenket(self, bit: usize) -> [Complex64; 2] {
        let h = FRAC_1_SQRT_2;
        let sgn = if bit == 0 { 1.0 } else { -1.0 };
        match self {
            Pauli::X => [Complex64::new(h, 0.0), Complex64::new(sgn * h, 0.0)],
            Pauli::Y => [Complex64::new(h, 0.0), Complex64::new(0.0, sgn * h)],
            Pauli::Z | Pauli::I => {
                if bit == 0 {
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
                } else {
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
                }
            }
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(TomoError::InvalidQubitCount(letters.len()));
        }
        Ok(Self(letters))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn from_index(n: usize, mut idx: usize) -> Self {
        let mut letters = vec![Pauli::I; n];
        for q in (0..n).rev() {
            letters[q] = Pauli::from_index(idx % 4);
            idx /= 4;
        }
        Self(letters)
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// True iff every non-identity letter of `self` agrees with `setting`.
    pub fn is_compatible_with(&self, setting: &PauliWord) -> bool {
        self.0.len() == setting.0.len()
            && self
                .0
                .iter()
                .zip(&setting.0)
                .all(|(&s, &t)| s == Pauli::I || s == t)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = TomoError;

    /// Accepts `I`, `X`, `Y`, `Z` (any case); `_` and `-` stand for a blank
    /// (identity) slot.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '_' | '-' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(TomoError::InvalidPauliWord(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliWord::new(letters).map_err(|_| TomoError::InvalidPauliWord(s.to_string()))
    }
}

/// Dense `2^n x 2^n` matrix of a Pauli word.
pub fn pauli_word_matrix(w: &PauliWord) -> ComplexMatrix {
    w.letters()
        .iter()
        .skip(1)
        .fold(w.letters()[0].matrix(), |acc, p| kron(&acc, &p.matrix()))
}

/// `+1` or `-1`: the eigenvalue sign of outcome `k` for the sub-word selected by `mask`.
#[inline]
pub fn outcome_sign(mask: usize, outcome: usize) -> f64 {
    if (mask & outcome).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place unnormalized Walsh-Hadamard transform:
/// `out[m] = sum_k (-1)^{popcount(m & k)} in[k]`.
pub fn walsh_hadamard(buf: &mut [f64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (buf[i], buf[i + h]);
                buf[i] = a + b;
                buf[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// One measurement setting: a full-weight word and its `2^n` product eigenkets.
#[derive(Debug, Clone)]
pub struct Setting {
    pub word: PauliWord,
    kets: Vec<Vec<Complex64>>,
    /// Word index of the sub-word kept by each qubit mask.
    subwords: Vec<usize>,
}

impl Setting {
    pub fn kets(&self) -> &[Vec<Complex64>] {
        &self.kets
    }

    pub fn ket(&self, outcome: usize) -> &[Complex64] {
        &self.kets[outcome]
    }

    pub fn projector(&self, outcome: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&self.kets[outcome])
    }

    /// Word index of the sub-word selected by a qubit mask (bit `n-1-q` for qubit `q`).
    pub fn subword(&self, mask: usize) -> usize {
        self.subwords[mask]
    }
}

/// The product-Pauli POM: every full-weight word is a setting measured in its
/// product eigenbasis.
#[derive(Debug, Clone)]
pub struct PauliPom {
    n: usize,
    settings: Vec<Setting>,
    /// For each word index, the `(setting, mask)` pairs that measure it.
    estimators_of: Vec<Vec<(usize, usize)>>,
}

impl PauliPom {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn num_words(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn num_outcomes(&self) -> usize {
        self.dim()
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn setting(&self, t: usize) -> &Setting {
        &self.settings[t]
    }

    /// `(setting, mask)` pairs whose outcome signs estimate the given word.
    pub fn compatible(&self, word: usize) -> &[(usize, usize)] {
        &self.estimators_of[word]
    }

    /// Outcome sign table of `word` under setting `t`, or `None` when the word
    /// is not measured by that setting.
    pub fn sign_table(&self, t: usize, word: &PauliWord) -> Option<Vec<i8>> {
        let setting = &self.settings[t];
        if !word.is_compatible_with(&setting.word) {
            return None;
        }
        let mask = word_mask(word);
        Some(
            (0..self.dim())
                .map(|k| outcome_sign(mask, k) as i8)
                .collect(),
        )
    }

    /// Bit string of an outcome, qubit 0 first.
    pub fn outcome_label(&self, k: usize) -> String {
        (0..self.n)
            .map(|q| if (k >> (self.n - 1 - q)) & 1 == 0 { '0' } else { '1' })
            .collect()
    }

    /// All Born probabilities, setting-major, from the Pauli expectation vector
    /// `e_s = tr(rho sigma_s)`. Each setting's block sums to `e_I`.
    pub fn probabilities_from_expectations(&self, expectations: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let norm = 1.0 / d as f64;
        for (t, setting) in self.settings.iter().enumerate() {
            let block = &mut out[t * d..(t + 1) * d];
            for (mask, slot) in block.iter_mut().enumerate() {
                *slot = expectations[setting.subwords[mask]];
            }
            walsh_hadamard(block);
            for p in block.iter_mut() {
                *p *= norm;
            }
        }
    }

    /// Pauli expectation vector of `sum_{t,k} weights[t,k] Pi_{t,k}`, i.e. the
    /// coefficients `c_s` with operator `= 2^-n sum_s c_s sigma_s`.
    pub fn expectations_of_weighted_sum(&self, weights: &[f64], scratch: &mut [f64]) -> Vec<f64> {
        let d = self.dim();
        let mut coeffs = vec![0.0; self.num_words()];
        for (t, setting) in self.settings.iter().enumerate() {
            let block = &mut scratch[..d];
            block.copy_from_slice(&weights[t * d..(t + 1) * d]);
            walsh_hadamard(block);
            for (mask, &v) in block.iter().enumerate() {
                coeffs[setting.subwords[mask]] += v;
            }
        }
        coeffs
    }
}

fn word_mask(word: &PauliWord) -> usize {
    let n = word.num_qubits();
    word.letters()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
}

/// Builds the `3^n`-setting product-Pauli POM.
pub fn build_product_pauli_pom(n: usize) -> Result<PauliPom> {
    if n == 0 || n > MAX_QUBITS {
        return Err(TomoError::InvalidQubitCount(n));
    }
    let d = 1usize << n;
    let num_settings = 3usize.pow(n as u32);
    let mut settings = Vec::with_capacity(num_settings);
    for idx in 0..num_settings {
        let mut letters = vec![Pauli::X; n];
        let mut rem = idx;
        for q in (0..n).rev() {
            letters[q] = Pauli::MEASURED[rem % 3];
            rem /= 3;
        }
        let kets = (0..d)
            .map(|k| {
                let mut ket = vec![Complex64::new(1.0, 0.0)];
                for (q, p) in letters.iter().enumerate() {
                    let e = p.eigenket((k >> (n - 1 - q)) & 1);
                    ket = ket.iter().flat_map(|a| [a * e[0], a * e[1]]).collect();
                }
                ket
            })
            .collect();
        let subwords = (0..d)
            .map(|mask| {
                letters.iter().enumerate().fold(0, |acc, (q, p)| {
                    let kept = (mask >> (n - 1 - q)) & 1 == 1;
                    acc * 4 + if kept { p.index() } else { 0 }
                })
            })
            .collect();
        settings.push(Setting {
            word: PauliWord(letters),
            kets,
            subwords,
        });
    }
    let mut estimators_of = vec![Vec::new(); 1 << (2 * n)];
    for (t, s) in settings.iter().enumerate() {
        for mask in 0..d {
            estimators_of[s.subwords[mask]].push((t, mask));
        }
    }
    Ok(PauliPom {
        n,
        settings,
        estimators_of,
    })
}

/// `e_s = Re tr(rho sigma_s)` for every word, by a per-qubit transform.
pub fn pauli_expectations(rho: &ComplexMatrix) -> Vec<f64> {
    let d = rho.dim();
    let n = d.trailing_zeros() as usize;
    debug_assert_eq!(1 << n, d);
    let mut buf = interleave(rho, n);
    let i = Complex64::new(0.0, 1.0);
    for q in 0..n {
        let stride = 1usize << (2 * (n - 1 - q));
        for base in 0..buf.len() {
            if (base / stride) % 4 != 0 {
                continue;
            }
            let a00 = buf[base];
            let a01 = buf[base + stride];
            let a10 = buf[base + 2 * stride];
            let a11 = buf[base + 3 * stride];
            buf[base] = a00 + a11;
            buf[base + stride] = a01 + a10;
            buf[base + 2 * stride] = i * (a01 - a10);
            buf[base + 3 * stride] = a00 - a11;
        }
    }
    buf.into_iter().map(|z| z.re).collect()
}

/// Inverse of [`pauli_expectations`]: `2^-n sum_s e_s sigma_s`.
pub fn from_pauli_expectations(n: usize, expectations: &[f64]) -> ComplexMatrix {
    let d = 1usize << n;
    let mut buf: Vec<Complex64> = expectations.iter().map(|&e| Complex64::new(e, 0.0)).collect();
    let i = Complex64::new(0.0, 1.0);
    for q in 0..n {
        let stride = 1usize << (2 * (n - 1 - q));
        for base in 0..buf.len() {
            if (base / stride) % 4 != 0 {
                continue;
            }
            let ci = buf[base];
            let cx = buf[base + stride];
            let cy = buf[base + 2 * stride];
            let cz = buf[base + 3 * stride];
            buf[base] = ci + cz;
            buf[base + stride] = cx - i * cy;
            buf[base + 2 * stride] = cx + i * cy;
            buf[base + 3 * stride] = ci - cz;
        }
    }
    let scale = 1.0 / d as f64;
    let mut m = ComplexMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] = buf[interleaved_index(n, r, c)] * scale;
        }
    }
    m
}

/// Position of matrix entry `(r, c)` when the bits of row and column are
/// paired qubit by qubit.
fn interleaved_index(n: usize, r: usize, c: usize) -> usize {
    (0..n).fold(0, |acc, q| {
        let shift = n - 1 - q;
        acc * 4 + 2 * ((r >> shift) & 1) + ((c >> shift) & 1)
    })
}

fn interleave(m: &ComplexMatrix, n: usize) -> Vec<Complex64> {
    let d = m.dim();
    let mut buf = vec![Complex64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            buf[interleaved_index(n, r, c)] = m[(r, c)];
        }
    }
    buf
}
