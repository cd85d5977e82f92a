//! Complex Gabor wavelet bank and magnitude subband decomposition.
//!
//! Kernel `(u, v)` has wave vector `k_v · (cos φ_u, sin φ_u)` with
//! `k_v = k_max / f^v` and `φ_u = π (u − 1) / U`, and is sampled on a
//! `window_len × window_len` integer grid centred at the origin:
//!
//! ```text
//! ψ(z) = (k²/σ²) · exp(−k²|z|² / 2σ²) · [exp(i k·z) − c]
//! ```
//!
//! The DC term `c` is evaluated on the sampled window so the real part sums to
//! zero exactly; it converges to `exp(−σ²/2)` as the window grows.

use std::f64::consts::{PI, SQRT_2};

use crate::conv::{convolve_direct, ComplexKernel, ConvBackend, FftConvolver};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    /// Number of orientations `U`.
    pub directions: usize,
    /// Number of scales `V`.
    pub scales: usize,
    /// Envelope width `σ` in radians (e.g. `1.2π`).
    pub sigma: f64,
    pub k_max: f64,
    /// Spacing factor `f` between scales.
    pub spacing: f64,
    /// Side of the square kernel support, odd.
    pub window_len: usize,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self {
            directions: 8,
            scales: 4,
            sigma: PI,
            k_max: PI / 2.0,
            spacing: SQRT_2,
            window_len: 9,
        }
    }
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.directions == 0 || self.scales == 0 {
            return bad("directions and scales must be >= 1".into());
        }
        if self.window_len < 3 || self.window_len.is_multiple_of(2) {
            return bad(format!("window_len {} must be odd and >= 3", self.window_len));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma {} must be positive", self.sigma));
        }
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return bad(format!("k_max {} must be positive", self.k_max));
        }
        if !(self.spacing > 1.0 && self.spacing.is_finite()) {
            return bad(format!("spacing {} must be > 1", self.spacing));
        }
        Ok(())
    }

    /// Number of subbands `P = U · V`.
    pub fn subbands(&self) -> usize {
        self.directions * self.scales
    }

    /// `k_v = k_max / f^v` for 1-based scale `v`.
    pub fn wave_number(&self, v: usize) -> f64 {
        self.k_max / self.spacing.powi(v as i32)
    }

    /// `φ_u = π (u − 1) / U` for 1-based direction `u`.
    pub fn orientation(&self, u: usize) -> f64 {
        PI * (u as f64 - 1.0) / self.directions as f64
    }

    /// Zero-based subband index of `(u, v)`: scale-major, direction-minor.
    pub fn subband_index(&self, u: usize, v: usize) -> usize {
        (v - 1) * self.directions + (u - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    pub u: usize,
    pub v: usize,
    pub kernel: ComplexKernel,
}

impl GaborKernel {
    pub fn real_part(&self) -> &[f64] {
        &self.kernel.re
    }

    pub fn imag_part(&self) -> &[f64] {
        &self.kernel.im
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.kernel
            .re
            .iter()
            .chain(&self.kernel.im)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

pub fn build_kernel(params: &GaborParams, u: usize, v: usize) -> Result<GaborKernel> {
    params.validate()?;
    if !(1..=params.directions).contains(&u) || !(1..=params.scales).contains(&v) {
        return Err(Error::InvalidIndex {
            u,
            v,
            directions: params.directions,
            scales: params.scales,
        });
    }
    let k = params.wave_number(v);
    let phi = params.orientation(u);
    let (kx, ky) = (k * phi.cos(), k * phi.sin());
    let s2 = params.sigma * params.sigma;
    let gain = k * k / s2;
    let side = params.window_len;
    let r = (side / 2) as isize;

    let mut envelope = Vec::with_capacity(side * side);
    let mut phase = Vec::with_capacity(side * side);
    for y in -r..=r {
        for x in -r..=r {
            let (xf, yf) = (x as f64, y as f64);
            envelope.push(gain * (-k * k * (xf * xf + yf * yf) / (2.0 * s2)).exp());
            phase.push(kx * xf + ky * yf);
        }
    }
    let env_sum: f64 = envelope.iter().sum();
    let cos_sum: f64 = envelope.iter().zip(&phase).map(|(e, p)| e * p.cos()).sum();
    let dc = cos_sum / env_sum;

    let re = envelope
        .iter()
        .zip(&phase)
        .map(|(e, p)| e * (p.cos() - dc))
        .collect();
    let im = envelope
        .iter()
        .zip(&phase)
        .map(|(e, p)| e * p.sin())
        .collect();
    Ok(GaborKernel {
        u,
        v,
        kernel: ComplexKernel { side, re, im },
    })
}

/// `U × V` magnitude planes, ordered scale-major / direction-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandStack {
    pub directions: usize,
    pub scales: usize,
    planes: Vec<Image>,
}

impl SubbandStack {
    pub fn new(directions: usize, scales: usize, planes: Vec<Image>) -> Result<Self> {
        if planes.len() != directions * scales {
            return Err(Error::DimensionMismatch {
                expected: directions * scales,
                actual: planes.len(),
            });
        }
        if let Some(first) = planes.first() {
            if planes
                .iter()
                .any(|p| p.width() != first.width() || p.height() != first.height())
            {
                return Err(Error::InvalidParams("subband planes differ in size".into()));
            }
        }
        Ok(Self {
            directions,
            scales,
            planes,
        })
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn width(&self) -> usize {
        self.planes.first().map_or(0, Image::width)
    }

    pub fn height(&self) -> usize {
        self.planes.first().map_or(0, Image::height)
    }

    pub fn planes(&self) -> &[Image] {
        &self.planes
    }

    /// Plane for 1-based `(u, v)`.
    pub fn plane(&self, u: usize, v: usize) -> &Image {
        &self.planes[(v - 1) * self.directions + (u - 1)]
    }

    /// Reorders planes; `order[p]` names the source plane placed at position `p`.
    pub fn permuted(&self, order: &[usize]) -> SubbandStack {
        SubbandStack {
            directions: self.directions,
            scales: self.scales,
            planes: order.iter().map(|&p| self.planes[p].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaborBank {
    params: GaborParams,
    kernels: Vec<GaborKernel>,
}

impl GaborBank {
    /// Kernels in order `p = (v − 1) · U + (u − 1)`.
    pub fn new(params: GaborParams) -> Result<Self> {
        params.validate()?;
        let mut kernels = Vec::with_capacity(params.subbands());
        for v in 1..=params.scales {
            for u in 1..=params.directions {
                kernels.push(build_kernel(&params, u, v)?);
            }
        }
        Ok(Self { params, kernels })
    }

    pub fn params(&self) -> &GaborParams {
        &self.params
    }

    pub fn kernels(&self) -> &[GaborKernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn decompose(&self, image: &Image) -> Result<SubbandStack> {
        self.decompose_with(image, ConvBackend::Fft)
    }

    pub fn decompose_with(&self, image: &Image, backend: ConvBackend) -> Result<SubbandStack> {
        let wl = self.params.window_len;
        if image.width() < wl || image.height() < wl {
            return Err(Error::ImageTooSmall {
                width: image.width(),
                height: image.height(),
                required: wl,
            });
        }
        let planes = match backend {
            ConvBackend::Direct => self
                .kernels
                .iter()
                .map(|k| convolve_direct(image, &k.kernel).magnitude())
                .collect(),
            ConvBackend::Fft => {
                let conv = FftConvolver::new(image, wl / 2);
                self.kernels
                    .iter()
                    .map(|k| conv.convolve(&k.kernel).magnitude())
                    .collect()
            }
        };
        SubbandStack::new(self.params.directions, self.params.scales, planes)
    }
}
