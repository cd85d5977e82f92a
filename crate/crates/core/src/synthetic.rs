//! Oriented-grating texture classes for smoke tests, demos and benchmarks.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::image::{write_pgm, Image};
use crate::pipeline::{Manifest, ManifestRecord, Sample, GALLERY_SUBSET};

/// Subset tag given to the noisy probes.
pub const PROBE_SUBSET: &str = "noisy";

/// Wave numbers (radians per pixel) cycled through by [`grating_classes`].
pub const CLASS_FREQUENCIES: [f64; 2] = [0.4, 0.8];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingClass {
    pub orientation: f64,
    pub frequency: f64,
}

/// `0.5 + 0.4 cos(ω (x cos θ + y sin θ) + phase)`, values in `[0.1, 0.9]`.
pub fn grating(width: usize, height: usize, orientation: f64, frequency: f64, phase: f64) -> Image {
    let (c, s) = (orientation.cos(), orientation.sin());
    Image::from_fn(width, height, |x, y| {
        0.5 + 0.4 * (frequency * (x as f64 * c + y as f64 * s) + phase).cos()
    })
}

/// Adds i.i.d. Gaussian noise and clamps to `[0, 1]`.
pub fn add_noise(image: &Image, sigma: f64, rng: &mut ChaCha8Rng) -> Image {
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut out = image.clone();
    for v in out.pixels_mut() {
        *v = (*v + normal.sample(rng)).clamp(0.0, 1.0);
    }
    out
}

/// `n` classes with distinct (orientation, frequency) pairs: orientations are
/// spread over `[0, π)` and each orientation is paired with every frequency.
pub fn grating_classes(n: usize) -> Vec<GratingClass> {
    let per_freq = n.div_ceil(CLASS_FREQUENCIES.len()).max(1);
    (0..n)
        .map(|i| GratingClass {
            orientation: PI * (i % per_freq) as f64 / per_freq as f64,
            frequency: CLASS_FREQUENCIES[(i / per_freq) % CLASS_FREQUENCIES.len()],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub classes: usize,
    pub size: usize,
    pub probes_per_class: usize,
    /// Noise standard deviation as a fraction of the `[0, 1]` dynamic range.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            classes: 10,
            size: 64,
            probes_per_class: 5,
            noise_sigma: 0.05,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub gallery: Vec<Sample>,
    pub probes: Vec<Sample>,
}

pub fn subject_id(class: usize) -> String {
    format!("class{class:02}")
}

/// One gallery image and `probes_per_class` probes per class. Every image is
/// an independent rendering of its class: a uniformly random grating phase
/// plus additive noise, so gallery and probes share one acquisition model.
pub fn benchmark(cfg: &SyntheticConfig) -> SyntheticSet {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gallery = Vec::new();
    let mut probes = Vec::new();
    for (i, class) in grating_classes(cfg.classes).into_iter().enumerate() {
        let id = subject_id(i);
        let render = |label: String, rng: &mut ChaCha8Rng| {
            let phase = rng.random_range(0.0..2.0 * PI);
            let clean = grating(cfg.size, cfg.size, class.orientation, class.frequency, phase);
            Sample {
                label,
                subject_id: id.clone(),
                image: add_noise(&clean, cfg.noise_sigma, rng),
                keypoints: None,
            }
        };
        gallery.push(render(format!("{id}_g"), &mut rng));
        for p in 0..cfg.probes_per_class {
            probes.push(render(format!("{id}_p{p}"), &mut rng));
        }
    }
    SyntheticSet { gallery, probes }
}

/// Writes the benchmark as 8-bit PGMs plus `manifest.csv` (relative paths)
/// into `dir`, returning the manifest path.
pub fn write_benchmark(cfg: &SyntheticConfig, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let set = benchmark(cfg);
    let mut records = Vec::new();
    let tagged = set
        .gallery
        .iter()
        .map(|s| (s, GALLERY_SUBSET))
        .chain(set.probes.iter().map(|s| (s, PROBE_SUBSET)));
    for (sample, subset) in tagged {
        let name = format!("{}.pgm", sample.label);
        write_pgm(&dir.join(&name), &sample.image)?;
        records.push(ManifestRecord {
            path: PathBuf::from(name),
            subject_id: sample.subject_id.clone(),
            subset: subset.to_string(),
        });
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, Manifest::new(records)?.to_csv())?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_are_distinct() {
        let c = grating_classes(10);
        assert_eq!(c.len(), 10);
        for i in 0..10 {
            for j in 0..i {
                assert!(c[i] != c[j]);
            }
        }
    }

    #[test]
    fn benchmark_shape_and_determinism() {
        let cfg = SyntheticConfig::default();
        let a = benchmark(&cfg);
        assert_eq!(a.gallery.len(), 10);
        assert_eq!(a.probes.len(), 50);
        assert_eq!(a, benchmark(&cfg));
        assert!(a.probes[0]
            .image
            .pixels()
            .iter()
            .all(|v| (0.0..=1.0).contains(v)));
    }
}
