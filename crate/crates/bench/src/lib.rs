//! Deterministic inputs shared by the benchmarks.

use lglg_core::spd::SymMatrix;
use lglg_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Image {
    Image::from_fn(width, height, |_, _| rng.random::<f64>())
}

/// `A Aᵀ / d + 0.1 I` for uniform `A`.
pub fn spd(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix {
    let a: Vec<f64> = (0..d * d).map(|_| rng.random::<f64>() - 0.5).collect();
    SymMatrix::from_fn(d, |i, j| {
        let dot: f64 = (0..d).map(|k| a[i * d + k] * a[j * d + k]).sum();
        dot / d as f64 + if i == j { 0.1 } else { 0.0 }
    })
}

pub fn feature_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}
