//! Illumination normalization: gamma correction, difference-of-Gaussians
//! band-pass, and two-stage contrast equalization with a tanh squashing.

use crate::conv::separable_convolve;
use crate::error::{Error, Result};
use crate::image::Image;

/// Largest absolute pixel value still treated as an all-zero image.
pub const DEGENERATE_LEVEL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessParams {
    pub gamma: f64,
    pub dog_sigma_inner: f64,
    pub dog_sigma_outer: f64,
    pub contrast_alpha: f64,
    pub contrast_tau: f64,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            dog_sigma_inner: 1.0,
            dog_sigma_outer: 2.0,
            contrast_alpha: 0.1,
            contrast_tau: 10.0,
        }
    }
}

impl PreprocessParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} must be in (0, 1]", self.gamma));
        }
        if !(self.dog_sigma_inner > 0.0 && self.dog_sigma_inner < self.dog_sigma_outer)
            || !self.dog_sigma_outer.is_finite()
        {
            return bad(format!(
                "DoG sigmas must satisfy 0 < inner ({}) < outer ({})",
                self.dog_sigma_inner, self.dog_sigma_outer
            ));
        }
        if !(self.contrast_alpha > 0.0 && self.contrast_alpha < 1.0) {
            return bad(format!("contrast_alpha {} must be in (0, 1)", self.contrast_alpha));
        }
        if !(self.contrast_tau > 0.0 && self.contrast_tau.is_finite()) {
            return bad(format!("contrast_tau {} must be positive", self.contrast_tau));
        }
        Ok(())
    }
}

/// `in^gamma` for pixels in `[0, 1]`.
pub fn gamma_correct(image: &Image, gamma: f64) -> Result<Image> {
    if let Some(&bad) = image
        .pixels()
        .iter()
        .find(|v| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::OutOfRange { value: bad });
    }
    Ok(image.map(|v| v.powf(gamma)))
}

/// Sampled Gaussian of radius `ceil(3σ)`, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// `G(σ_inner) * I − G(σ_outer) * I` with reflect boundaries.
pub fn dog_filter(image: &Image, sigma_inner: f64, sigma_outer: f64) -> Result<Image> {
    if !(sigma_inner > 0.0 && sigma_inner < sigma_outer) {
        return Err(Error::InvalidParams(format!(
            "DoG sigmas must satisfy 0 < inner ({sigma_inner}) < outer ({sigma_outer})"
        )));
    }
    let fine = separable_convolve(image, &gaussian_kernel(sigma_inner));
    let coarse = separable_convolve(image, &gaussian_kernel(sigma_outer));
    let data = fine
        .pixels()
        .iter()
        .zip(coarse.pixels())
        .map(|(a, b)| a - b)
        .collect();
    Image::new(image.width(), image.height(), data)
}

fn alpha_mean(values: impl Iterator<Item = f64>, alpha: f64, n: usize) -> f64 {
    (values.map(|v| v.powf(alpha)).sum::<f64>() / n as f64).powf(1.0 / alpha)
}

/// Two robust rescalings followed by `x ↦ τ · tanh(x / τ)`.
pub fn contrast_equalize(image: &Image, alpha: f64, tau: f64) -> Result<Image> {
    if image.pixels().iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("image has non-finite pixels"));
    }
    let peak = image.pixels().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak <= DEGENERATE_LEVEL {
        return Err(Error::DegenerateInput("image is identically zero"));
    }
    let n = image.pixels().len();
    let s1 = alpha_mean(image.pixels().iter().map(|v| v.abs()), alpha, n);
    let stage1 = image.map(|v| v / s1);
    let s2 = alpha_mean(stage1.pixels().iter().map(|v| v.abs().min(tau)), alpha, n);
    Ok(stage1.map(|v| tau * (v / s2 / tau).tanh()))
}

pub fn preprocess_chain(image: &Image, params: &PreprocessParams) -> Result<Image> {
    params.validate()?;
    let g = gamma_correct(image, params.gamma)?;
    let d = dog_filter(&g, params.dog_sigma_inner, params.dog_sigma_outer)?;
    contrast_equalize(&d, params.contrast_alpha, params.contrast_tau)
}
