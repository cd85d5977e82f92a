//! "Same"-size 2-D convolution with mirror-reflect boundaries.
//!
//! Complex kernels are applied to a real image either by direct summation or
//! through a 2-D FFT of the padded image. Both paths compute the same
//! quantity; the direct path is the reference, the FFT path is the fast one.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvBackend {
    Direct,
    #[default]
    Fft,
}

/// Square complex kernel, row-major, `side × side` with odd `side`.
/// Entry `(row, col)` holds the tap at offset `(col − r, row − r)`, `r = side / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexKernel {
    pub side: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexKernel {
    pub fn radius(&self) -> usize {
        self.side / 2
    }

    #[inline]
    pub fn tap(&self, dx: isize, dy: isize) -> (f64, f64) {
        let r = self.radius() as isize;
        let idx = (dy + r) as usize * self.side + (dx + r) as usize;
        (self.re[idx], self.im[idx])
    }
}

/// Complex response of a real image: real and imaginary planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexResponse {
    pub re: Image,
    pub im: Image,
}

impl ComplexResponse {
    pub fn magnitude(&self) -> Image {
        let data = self
            .re
            .pixels()
            .iter()
            .zip(self.im.pixels())
            .map(|(a, b)| a.hypot(*b))
            .collect();
        Image::new(self.re.width(), self.re.height(), data).expect("matching planes")
    }
}

/// `out(x, y) = Σ k(a, b) · I(x − a, y − b)` by direct summation.
pub fn convolve_direct(image: &Image, kernel: &ComplexKernel) -> ComplexResponse {
    let r = kernel.radius() as isize;
    let padded = image.reflect_pad(kernel.radius());
    let pw = padded.width();
    let px = padded.pixels();
    let (w, h) = (image.width(), image.height());
    let mut re = Vec::with_capacity(w * h);
    let mut im = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut sr, mut si) = (0.0, 0.0);
            for b in -r..=r {
                let row = (y + r - b) as usize * pw;
                for a in -r..=r {
                    let v = px[row + (x + r - a) as usize];
                    let (kr, ki) = kernel.tap(a, b);
                    sr += kr * v;
                    si += ki * v;
                }
            }
            re.push(sr);
            im.push(si);
        }
    }
    ComplexResponse {
        re: Image::new(w, h, re).unwrap(),
        im: Image::new(w, h, im).unwrap(),
    }
}

/// FFT convolution of one image against many kernels sharing a radius.
///
/// The image is reflect-padded by the kernel radius and transformed once;
/// each kernel then costs one forward and one inverse transform of the padded size.
/// Circular wrap-around never reaches the cropped output because the padding
/// equals the kernel radius.
pub struct FftConvolver {
    width: usize,
    height: usize,
    radius: usize,
    pw: usize,
    ph: usize,
    spectrum: Vec<Complex64>,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl FftConvolver {
    pub fn new(image: &Image, radius: usize) -> Self {
        let padded = image.reflect_pad(radius);
        let (pw, ph) = (padded.width(), padded.height());
        let mut planner = FftPlanner::new();
        let mut me = Self {
            width: image.width(),
            height: image.height(),
            radius,
            pw,
            ph,
            spectrum: Vec::new(),
            row_fwd: planner.plan_fft_forward(pw),
            col_fwd: planner.plan_fft_forward(ph),
            row_inv: planner.plan_fft_inverse(pw),
            col_inv: planner.plan_fft_inverse(ph),
        };
        let mut buf: Vec<Complex64> = padded
            .pixels()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        me.transform(&mut buf, false);
        me.spectrum = buf;
        me
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        for r in buf.chunks_exact_mut(self.pw) {
            row.process(r);
        }
        let mut column = vec![Complex64::default(); self.ph];
        for x in 0..self.pw {
            for (y, c) in column.iter_mut().enumerate() {
                *c = buf[y * self.pw + x];
            }
            col.process(&mut column);
            for (y, c) in column.iter().enumerate() {
                buf[y * self.pw + x] = *c;
            }
        }
    }

    pub fn convolve(&self, kernel: &ComplexKernel) -> ComplexResponse {
        assert_eq!(
            kernel.radius(),
            self.radius,
            "kernel radius must match the padding"
        );
        let r = self.radius as isize;
        let mut buf = vec![Complex64::default(); self.pw * self.ph];
        for b in -r..=r {
            let y = b.rem_euclid(self.ph as isize) as usize;
            for a in -r..=r {
                let x = a.rem_euclid(self.pw as isize) as usize;
                let (kr, ki) = kernel.tap(a, b);
                buf[y * self.pw + x] = Complex64::new(kr, ki);
            }
        }
        self.transform(&mut buf, false);
        for (k, s) in buf.iter_mut().zip(&self.spectrum) {
            *k *= *s;
        }
        self.transform(&mut buf, true);

        let norm = 1.0 / (self.pw * self.ph) as f64;
        let mut re = Vec::with_capacity(self.width * self.height);
        let mut im = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            let row = (y + self.radius) * self.pw + self.radius;
            for c in &buf[row..row + self.width] {
                re.push(c.re * norm);
                im.push(c.im * norm);
            }
        }
        ComplexResponse {
            re: Image::new(self.width, self.height, re).unwrap(),
            im: Image::new(self.width, self.height, im).unwrap(),
        }
    }
}

/// Convolves rows then columns with a symmetric odd-length 1-D kernel.
pub fn separable_convolve(image: &Image, kernel: &[f64]) -> Image {
    let r = (kernel.len() / 2) as isize;
    let (w, h) = (image.width(), image.height());
    let horizontal = Image::from_fn(w, h, |x, y| {
        (-r..=r)
            .map(|a| kernel[(a + r) as usize] * image.get_reflect(x as isize - a, y as isize))
            .sum()
    });
    Image::from_fn(w, h, |x, y| {
        (-r..=r)
            .map(|b| kernel[(b + r) as usize] * horizontal.get_reflect(x as isize, y as isize - b))
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_kernel() -> ComplexKernel {
        ComplexKernel {
            side: 3,
            re: vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            im: vec![0.0; 9],
        }
    }

    #[test]
    fn shift_kernel_translates() {
        // Tap at offset (+1, 0): out(x, y) = I(x − 1, y).
        let img = Image::from_fn(4, 3, |x, y| (x + 10 * y) as f64);
        let out = convolve_direct(&img, &box_kernel());
        assert_eq!(out.re.get(2, 1), img.get(1, 1));
        // Reflect boundary: I(−1, y) = I(1, y).
        assert_eq!(out.re.get(0, 2), img.get(1, 2));
        let fft = FftConvolver::new(&img, 1).convolve(&box_kernel());
        for (a, b) in fft.re.pixels().iter().zip(out.re.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_identity() {
        let img = Image::from_fn(5, 5, |x, y| (x * y) as f64);
        assert_eq!(separable_convolve(&img, &[0.0, 1.0, 0.0]), img);
    }
}
