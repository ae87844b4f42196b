//! Named target states, Haar-random kets, white-noise mixing and state files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TomoError};
use crate::linalg::{eig_hermitian, ComplexMatrix};
use crate::pauli::PauliPom;

/// Tolerance for [`is_physical`].
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Which pure state (or file) a [`StateSpec`] starts from.
#[derive(Debug, Clone, PartialEq)]
pub enum StateKind {
    Ghz4,
    W4,
    HaarRandomPure { seed: u64 },
    File(PathBuf),
}

/// A state recipe: a base state, optionally depolarized to a given fidelity
/// with respect to that base state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub kind: StateKind,
    pub noise_fidelity: Option<f64>,
}

impl StateSpec {
    pub fn pure(kind: StateKind) -> Self {
        Self {
            kind,
            noise_fidelity: None,
        }
    }

    pub fn with_fidelity(kind: StateKind, f0: f64) -> Self {
        Self {
            kind,
            noise_fidelity: Some(f0),
        }
    }

    /// Short human-readable name, used in summaries.
    pub fn label(&self) -> String {
        let base = match &self.kind {
            StateKind::Ghz4 => "ghz4".to_string(),
            StateKind::W4 => "w4".to_string(),
            StateKind::HaarRandomPure { seed } => format!("random-pure:{seed}"),
            StateKind::File(p) => format!("file:{}", p.display()),
        };
        match self.noise_fidelity {
            Some(f) => format!("{base}@F0={f}"),
            None => base,
        }
    }
}

fn basis_ket(dim: usize, entries: &[(usize, f64)]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    for &(i, a) in entries {
        v[i] = Complex64::new(a, 0.0);
    }
    v
}

/// `(|0000> + |1111>) / sqrt 2`.
pub fn ghz4_ket() -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    basis_ket(16, &[(0b0000, h), (0b1111, h)])
}

/// `(|0001> + |0010> + |0100> + |1000>) / 2`.
pub fn w4_ket() -> Vec<Complex64> {
    basis_ket(16, &[(0b0001, 0.5), (0b0010, 0.5), (0b0100, 0.5), (0b1000, 0.5)])
}

/// Unit vector of i.i.d. standard complex Gaussians, which is Haar distributed.
pub fn haar_random_ket(dim: usize, seed: u64) -> Vec<Complex64> {
    assert!(dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// `lambda rho + (1 - lambda) I/d` with `lambda` chosen so that the fidelity
/// with the pure state `psi` equals `f0`.
pub fn depolarize_to_fidelity(psi: &[Complex64], f0: f64) -> Result<ComplexMatrix> {
    let d = psi.len() as f64;
    let min = 1.0 / d;
    if !(min - 1e-15..=1.0 + 1e-15).contains(&f0) || !f0.is_finite() {
        return Err(TomoError::InfeasibleMixing { fidelity: f0, min });
    }
    let lambda = ((f0 - min) / (1.0 - min)).clamp(0.0, 1.0);
    let pure = ComplexMatrix::outer(psi);
    let mixed = ComplexMatrix::identity(psi.len()).scale((1.0 - lambda) / d);
    Ok(&pure.scale(lambda) + &mixed)
}

/// `f0 |psi><psi| + (1 - f0) (I - |psi><psi|)/(d - 1)`: noise confined to the
/// orthogonal complement, which reaches every fidelity in `[0, 1]`, including
/// the nearly orthogonal states white noise cannot produce.
pub fn mix_with_complement(psi: &[Complex64], f0: f64) -> Result<ComplexMatrix> {
    let d = psi.len();
    if !(0.0..=1.0).contains(&f0) || d < 2 {
        return Err(TomoError::InfeasibleMixing { fidelity: f0, min: 0.0 });
    }
    let pure = ComplexMatrix::outer(psi);
    let complement = &ComplexMatrix::identity(d) - &pure;
    Ok(&pure.scale(f0) + &complement.scale((1.0 - f0) / (d - 1) as f64))
}

/// The pure ket of a spec, if the kind has one without consulting a file.
fn builtin_ket(kind: &StateKind) -> Option<Vec<Complex64>> {
    match kind {
        StateKind::Ghz4 => Some(ghz4_ket()),
        StateKind::W4 => Some(w4_ket()),
        StateKind::HaarRandomPure { seed } => Some(haar_random_ket(16, *seed)),
        StateKind::File(_) => None,
    }
}

/// Ket of a spec's base state. File states must be rank one.
pub fn base_ket(kind: &StateKind) -> Result<Vec<Complex64>> {
    match builtin_ket(kind) {
        Some(k) => Ok(k),
        None => {
            let StateKind::File(path) = kind else {
                unreachable!()
            };
            pure_ket_of(&read_state_file(path)?)
        }
    }
}

/// Extracts `|psi>` from a rank-one density matrix.
pub fn pure_ket_of(rho: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let es = eig_hermitian(rho)?;
    let largest = es.max();
    if (largest - 1.0).abs() > 1e-8 {
        return Err(TomoError::NotPure { largest });
    }
    Ok(es.eigenvectors.last().unwrap().clone())
}

/// Builds the density matrix described by a spec.
pub fn make_state(spec: &StateSpec) -> Result<ComplexMatrix> {
    match (&spec.kind, spec.noise_fidelity) {
        (StateKind::File(path), None) => read_state_file(path),
        (kind, None) => Ok(ComplexMatrix::outer(&base_ket(kind)?)),
        (kind, Some(f0)) => depolarize_to_fidelity(&base_ket(kind)?, f0),
    }
}

/// Conditional outcome distribution `p_k = <v_k|rho|v_k>` of one setting.
/// Rounding-level negatives are clipped to zero.
pub fn born_probabilities(rho: &ComplexMatrix, pom: &PauliPom, setting: usize) -> Vec<f64> {
    pom.setting(setting)
        .kets()
        .iter()
        .map(|v| {
            let p = rho.expectation(v).re;
            if p < 0.0 && p > -1e-12 {
                0.0
            } else {
                p
            }
        })
        .collect()
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.min())
}

/// Unit trace and no eigenvalue below `-1e-10`.
pub fn is_physical(h: &ComplexMatrix) -> bool {
    if h.hermitian_defect() > PHYSICAL_TOL || (h.trace().re - 1.0).abs() > PHYSICAL_TOL {
        return false;
    }
    matches!(min_eigenvalue(h), Ok(m) if m >= -PHYSICAL_TOL)
}

pub fn check_physical(h: &ComplexMatrix) -> Result<()> {
    if is_physical(h) {
        Ok(())
    } else {
        Err(TomoError::NotPhysical {
            min_eigenvalue: min_eigenvalue(h).unwrap_or(f64::NAN),
            trace: h.trace().re,
        })
    }
}

/// Parses the plain-text state format: first line `dim`, then `dim^2` lines of
/// `row col real imag`. Blank lines and `#` comments are skipped.
pub fn parse_state(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, first) = lines.next().ok_or(TomoError::Parse {
        line: 1,
        msg: "empty state file".into(),
    })?;
    let dim: usize = first.parse().map_err(|_| TomoError::Parse {
        line,
        msg: format!("expected dimension, got {first:?}"),
    })?;
    if dim == 0 {
        return Err(TomoError::Parse {
            line,
            msg: "dimension must be positive".into(),
        });
    }
    let mut m = ComplexMatrix::zeros(dim);
    let mut seen = vec![false; dim * dim];
    for (line, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        let bad = |msg: String| TomoError::Parse { line, msg };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", fields.len())));
        }
        let r: usize = fields[0].parse().map_err(|_| bad("bad row".into()))?;
        let c: usize = fields[1].parse().map_err(|_| bad("bad column".into()))?;
        let re: f64 = fields[2].parse().map_err(|_| bad("bad real part".into()))?;
        let im: f64 = fields[3].parse().map_err(|_| bad("bad imaginary part".into()))?;
        if r >= dim || c >= dim {
            return Err(bad(format!("index ({r}, {c}) out of range")));
        }
        if seen[r * dim + c] {
            return Err(bad(format!("duplicate entry ({r}, {c})")));
        }
        seen[r * dim + c] = true;
        m[(r, c)] = Complex64::new(re, im);
    }
    if seen.iter().any(|s| !s) {
        return Err(TomoError::Parse {
            line: 0,
            msg: format!("expected {} entries", dim * dim),
        });
    }
    Ok(m)
}

/// Reads a state file and requires the result to be physical.
pub fn read_state_file(path: &Path) -> Result<ComplexMatrix> {
    let m = parse_state(&std::fs::read_to_string(path)?)?;
    check_physical(&m)?;
    Ok(m)
}

pub fn format_state(rho: &ComplexMatrix) -> String {
    let d = rho.dim();
    let mut s = format!("{d}\n");
    for r in 0..d {
        for c in 0..d {
            let z = rho[(r, c)];
            let _ = writeln!(s, "{r} {c} {:e} {:e}", z.re, z.im);
        }
    }
    s
}

pub fn write_state_file(path: &Path, rho: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, format_state(rho))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::build_product_pauli_pom;

    fn fidelity_with(psi: &[Complex64], rho: &ComplexMatrix) -> f64 {
        rho.expectation(psi).re
    }

    #[test]
    fn ghz_pure_projector() {
        let rho = make_state(&StateSpec::with_fidelity(StateKind::Ghz4, 1.0)).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::outer(&ghz4_ket())) < 1e-15);
        assert!(is_physical(&rho));
    }

    #[test]
    fn noisy_ghz_mixing_weight() {
        let rho = make_state(&StateSpec::with_fidelity(StateKind::Ghz4, 0.8)).unwrap();
        let lambda: f64 = (0.8 - 1.0 / 16.0) / (1.0 - 1.0 / 16.0);
        assert!((lambda - 0.786_666_666_666_666_6).abs() < 1e-15);
        // off-diagonal GHZ coherence is lambda / 2
        assert!((rho[(0, 15)].re - lambda / 2.0).abs() < 1e-15);
        assert!((fidelity_with(&ghz4_ket(), &rho) - 0.8).abs() < 1e-14);
        assert!(is_physical(&rho));
    }

    #[test]
    fn complement_mixture_reaches_low_fidelity() {
        let psi = haar_random_ket(16, 1);
        let rho = mix_with_complement(&psi, 0.016).unwrap();
        assert!((rho.expectation(&psi).re - 0.016).abs() < 1e-12);
        assert!(is_physical(&rho));
        assert!(mix_with_complement(&psi, 1.2).is_err());
    }

    #[test]
    fn maximally_mixed_endpoint_and_infeasible_mixing() {
        let rho = make_state(&StateSpec::with_fidelity(StateKind::W4, 1.0 / 16.0)).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::identity(16).scale(1.0 / 16.0)) < 1e-15);
        let err = make_state(&StateSpec::with_fidelity(StateKind::W4, 0.016)).unwrap_err();
        assert!(matches!(err, TomoError::InfeasibleMixing { .. }));
    }

    #[test]
    fn haar_ket_is_normalized_and_deterministic() {
        for seed in 0..20 {
            let v = haar_random_ket(16, seed);
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert_eq!(v, haar_random_ket(16, seed));
        }
        assert_ne!(haar_random_ket(16, 1), haar_random_ket(16, 2));
    }

    #[test]
    fn haar_first_component_moment() {
        // E|<e0|phi>|^2 = 1/d; per-sample variance is (d-1)/(d^2 (d+1)).
        let dim = 16;
        let samples = 100_000u64;
        let mean = (0..samples)
            .map(|s| haar_random_ket(dim, s)[0].norm_sqr())
            .sum::<f64>()
            / samples as f64;
        let d = dim as f64;
        let se = ((d - 1.0) / (d * d * (d + 1.0)) / samples as f64).sqrt();
        assert!((mean - 1.0 / d).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn born_probabilities_simple_cases() {
        let pom = build_product_pauli_pom(4).unwrap();
        let mixed = ComplexMatrix::identity(16).scale(1.0 / 16.0);
        for t in [0, 40, 80] {
            for p in born_probabilities(&mixed, &pom, t) {
                assert!((p - 1.0 / 16.0).abs() < 1e-15);
            }
        }
        let ghz = ComplexMatrix::outer(&ghz4_ket());
        let zzzz = pom
            .settings()
            .iter()
            .position(|s| s.word.to_string() == "ZZZZ")
            .unwrap();
        let p = born_probabilities(&ghz, &pom, zzzz);
        for (k, &pk) in p.iter().enumerate() {
            let want = if k == 0 || k == 15 { 0.5 } else { 0.0 };
            assert!((pk - want).abs() < 1e-15);
        }
    }

    #[test]
    fn ghz_in_xxxx_is_uniform_over_even_parity() {
        // Dense oracle: |<x_k|GHZ>|^2 with explicit X-basis kets built
        // independently of the POM construction.
        let pom = build_product_pauli_pom(4).unwrap();
        let ghz = ghz4_ket();
        let xxxx = pom
            .settings()
            .iter()
            .position(|s| s.word.to_string() == "XXXX")
            .unwrap();
        let p = born_probabilities(&ComplexMatrix::outer(&ghz), &pom, xxxx);
        for k in 0..16usize {
            // <x_k|j> = 2^-2 (-1)^{k.j}
            let amp: Complex64 = (0..16usize)
                .map(|j| ghz[j] * 0.25 * if (k & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
                .sum();
            assert!((p[k] - amp.norm_sqr()).abs() < 1e-14);
            let want = if k.count_ones() % 2 == 0 { 0.125 } else { 0.0 };
            assert!((p[k] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        let mixed = ComplexMatrix::identity(16).scale(1.0 / 16.0);
        assert!((min_eigenvalue(&mixed).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let d = ComplexMatrix::from_real_diagonal(&[1.1, -0.1]);
        assert!((min_eigenvalue(&d).unwrap() + 0.1).abs() < 1e-15);
        assert!(!is_physical(&d));
    }

    #[test]
    fn state_file_round_trip_and_validation() {
        let rho = make_state(&StateSpec::with_fidelity(StateKind::HaarRandomPure { seed: 3 }, 0.7))
            .unwrap();
        let parsed = parse_state(&format_state(&rho)).unwrap();
        assert!(parsed.max_abs_diff(&rho) < 1e-15);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "2\n0 0 1.1 0\n0 1 0 0\n1 0 0 0\n1 1 -0.1 0\n").unwrap();
        assert!(matches!(
            read_state_file(&path),
            Err(TomoError::NotPhysical { .. })
        ));
        assert!(parse_state("2\n0 0 1 0\n").is_err());
        assert!(parse_state("2\n0 0 1 0\n0 0 1 0\n1 0 0 0\n1 1 0 0").is_err());
    }

    #[test]
    fn file_state_as_pure_target() {
        let psi = haar_random_ket(16, 9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pure.txt");
        write_state_file(&path, &ComplexMatrix::outer(&psi)).unwrap();
        let ket = base_ket(&StateKind::File(path.clone())).unwrap();
        let overlap: Complex64 = ket.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);

        let mixed_path = dir.path().join("mixed.txt");
        write_state_file(&mixed_path, &ComplexMatrix::identity(16).scale(1.0 / 16.0)).unwrap();
        assert!(matches!(
            base_ket(&StateKind::File(mixed_path)),
            Err(TomoError::NotPure { .. })
        ));
    }
}
