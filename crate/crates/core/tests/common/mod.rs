#![allow(dead_code)]

use lglg_core::spd::SymMatrix;
use lglg_core::Image;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Well-conditioned SPD: `G Gᵀ / d + shift · I`.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize, shift: f64) -> SymMatrix {
    let g = gaussian_matrix(rng, d, d);
    let m = &g * g.transpose() / d as f64 + DMatrix::identity(d, d) * shift;
    SymMatrix::from_upper(m)
}

/// Symmetric eigendecomposition done directly with nalgebra, independent of `spd`.
pub fn spectral_fn(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mapped = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * mapped * eig.eigenvectors.transpose()
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| rng.random::<f64>())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
