//! Dense complex matrices for small Hermitian problems.
//!
//! Everything in the crate works with `d x d` matrices where `d = 2^n` and
//! `n <= 5`, so the storage is a flat row-major `Vec<Complex64>` and the
//! eigensolver is a cyclic complex Jacobi sweep.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Result, TomoError};

/// Entrywise tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in `[-PSD_CLIP, 0)` are treated as zero by PSD-requiring operations.
pub const PSD_CLIP: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Fails if the length is not a
    /// perfect square or an entry is not finite.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(TomoError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TomoError::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// The projector `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `H - H^dagger`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(H + H^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// `<v| self |v>`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        assert_eq!(v.len(), self.dim);
        let mut acc = ZERO;
        for i in 0..self.dim {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            let hv: Complex64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            acc += v[i].conj() * hv;
        }
        acc
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Sum of squared moduli of all entries.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks_exact(self.dim) {
            write!(f, " ")?;
            for z in row {
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenSystem {
    /// `sum_i f(lambda_i) |v_i><v_i|`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let dim = self.eigenvalues.len();
        let mut out = ComplexMatrix::zeros(dim);
        for (&lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..dim {
                let vi = v[i] * w;
                for j in 0..dim {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// The input is re-symmetrized before the sweep, so rounding-level asymmetry is
/// harmless; anything beyond [`HERMITIAN_TOL`] is rejected.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<EigenSystem> {
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(TomoError::NotHermitian { defect });
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let total = a.frobenius_sq();
    let off_sq = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s
    };

    for _sweep in 0..100 {
        let off = off_sq(&a);
        if off <= (f64::EPSILON * f64::EPSILON) * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let g = b.norm();
                if g <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Unitary D*P: the phase turns the pivot real, then a real
                // rotation annihilates it.
                let phase = b / g; // e^{i phi}
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;

                // A <- A U
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                // A <- U^dagger A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V U
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&j| (0..n).map(|k| v[(k, j)]).collect())
        .collect();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let es = eig_hermitian(a)?;
    if es.min() < -PSD_CLIP {
        return Err(TomoError::NotPositiveSemidefinite {
            min_eigenvalue: es.min(),
        });
    }
    Ok(es.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Kronecker product, `(A (x) B)[(i,j),(k,l)] = A[i,k] B[j,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(da * db);
    for i in 0..da {
        for k in 0..da {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..db {
                for l in 0..db {
                    out[(i * db + j, k * db + l)] = aik * b[(j, l)];
                }
            }
        }
    }
    out
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(TomoError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let n = a.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    Ok(acc)
}

/// Trace norm distance `||A - B||_1 / 2` between Hermitian matrices.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let es = eig_hermitian(&(a - b))?;
    Ok(0.5 * es.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }
    fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
    }
    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    #[test]
    fn identity_eigenvalues() {
        let es = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_z_eigenvalues_ascending() {
        let es = eig_hermitian(&pauli_z()).unwrap();
        assert_eq!(es.eigenvalues, vec![-1.0, 1.0]);
    }

    #[test]
    fn pauli_y_eigenvectors_reconstruct() {
        let y = pauli_y();
        let es = eig_hermitian(&y).unwrap();
        assert!((es.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(es.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_major(2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        match eig_hermitian(&m) {
            Err(TomoError::NotHermitian { defect }) => assert!((defect - 1.0).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = ComplexMatrix::identity(4);
        assert!(sqrt_psd(&id).unwrap().max_abs_diff(&id) < 1e-15);
        let d = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]);
        let r = sqrt_psd(&d).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0])) < 1e-15);
    }

    #[test]
    fn sqrt_rejects_negative_eigenvalue() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(
            sqrt_psd(&d),
            Err(TomoError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn sqrt_clips_rounding_negatives() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -5e-10]);
        let r = sqrt_psd(&d).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
    }

    #[test]
    fn kron_small_cases() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zz = kron(&pauli_z(), &pauli_z());
        assert_eq!(zz, ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_matches_index_formula() {
        let (x, z) = (pauli_x(), pauli_z());
        let k = kron(&x, &z);
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..2 {
                    for l in 0..2 {
                        assert_eq!(k[(2 * i + j, 2 * kk + l)], x[(i, kk)] * z[(j, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_products() {
        let i16 = ComplexMatrix::identity(16);
        let t = trace_product(&i16.scale(1.0 / 16.0), &i16).unwrap();
        assert!((t - ONE).norm() < 1e-15);
        assert_eq!(trace_product(&pauli_x(), &pauli_y()).unwrap(), ZERO);
        assert!(trace_product(&pauli_x(), &i16).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors() {
        let p0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert!((trace_distance(&p0, &p1).unwrap() - 1.0).abs() < 1e-15);
    }
}
