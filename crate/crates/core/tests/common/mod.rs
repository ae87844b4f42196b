#![allow(dead_code)]

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tomo_core::ComplexMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// `G G^dag / tr` with `G` a `dim x rank` complex Gaussian matrix.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    let g: Vec<Complex64> = (0..dim * rank).map(|_| gaussian(&mut r)).collect();
    let mut rho = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            rho[(i, j)] = (0..rank).map(|k| g[i * rank + k] * g[j * rank + k].conj()).sum();
        }
    }
    let tr = rho.trace().re;
    rho.scale(1.0 / tr)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = Complex64::new(gaussian(&mut r).re, 0.0);
        for j in i + 1..dim {
            let z = gaussian(&mut r);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn to_nalgebra(m: &ComplexMatrix) -> nalgebra::DMatrix<Complex64> {
    let d = m.dim();
    nalgebra::DMatrix::from_fn(d, d, |i, j| m[(i, j)])
}
