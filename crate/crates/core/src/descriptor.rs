//! Per-block Gaussian modelling of Gabor magnitudes and the concatenated
//! image feature.
//!
//! Every pixel of a block contributes one `d`-dimensional sample (its `d = U·V`
//! subband magnitudes). The block Gaussian is embedded with
//! [`embed_gaussian`](crate::spd::embed_gaussian) and half-vectorized, so the
//! Euclidean distance between two local features equals the Frobenius distance
//! between the embedded Gaussians.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gabor::{GaborBank, GaborParams, SubbandStack};
use crate::image::Image;
use crate::preprocess::{preprocess_chain, PreprocessParams};
use crate::spd::{embed_gaussian, half_vec_len, half_vectorize, SymMatrix};

/// Ridge added to block covariances, relative to `trace(C) / d`.
pub const RIDGE_RELATIVE: f64 = 1e-4;
/// Lower bound on the ridge so that flat blocks still give an SPD covariance.
pub const RIDGE_MIN: f64 = 1e-10;

/// Landmark count used when the keypoint layout does not specify one.
pub const DEFAULT_KEYPOINT_COUNT: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockRect {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

/// Centred `rows × cols` tiling of square blocks; margins that do not fit a
/// whole block are discarded (the extra pixel of an odd margin goes to the
/// right/bottom side).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGrid {
    pub block_size: usize,
    pub rows: usize,
    pub cols: usize,
    pub origin_x: usize,
    pub origin_y: usize,
}

impl BlockGrid {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Blocks in row-major order.
    pub fn rects(&self) -> Vec<BlockRect> {
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(BlockRect {
                    x: self.origin_x + c * self.block_size,
                    y: self.origin_y + r * self.block_size,
                    size: self.block_size,
                });
            }
        }
        out
    }
}

fn check_block_fits(width: usize, height: usize, block_size: usize) -> Result<()> {
    if block_size == 0 || block_size > width.min(height) {
        return Err(Error::BlockTooLarge {
            block_size,
            width,
            height,
        });
    }
    Ok(())
}

pub fn partition_blocks(width: usize, height: usize, block_size: usize) -> Result<BlockGrid> {
    check_block_fits(width, height, block_size)?;
    let cols = width / block_size;
    let rows = height / block_size;
    Ok(BlockGrid {
        block_size,
        rows,
        cols,
        origin_x: (width - cols * block_size) / 2,
        origin_y: (height - rows * block_size) / 2,
    })
}

/// Ordered landmark coordinates `(x, y)` in image pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    pub points: Vec<(f64, f64)>,
}

impl KeypointSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Keypoints("non-finite coordinate".into()));
        }
        Ok(Self { points })
    }

    /// Parses one `x y` pair per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
                _ => None,
            };
            let (x, y) = parsed
                .ok_or_else(|| Error::Keypoints(format!("line {}: expected 'x y'", no + 1)))?;
            points.push((x, y));
        }
        Self::new(points)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn clamp_origin(center: f64, block_size: usize, extent: usize) -> usize {
    let start = (center - block_size as f64 / 2.0 + 0.5).floor();
    start.clamp(0.0, (extent - block_size) as f64) as usize
}

/// One block per keypoint, centred on it and shifted minimally to lie inside the image.
pub fn keypoint_blocks(
    width: usize,
    height: usize,
    keypoints: &KeypointSet,
    block_size: usize,
) -> Result<Vec<BlockRect>> {
    check_block_fits(width, height, block_size)?;
    Ok(keypoints
        .points
        .iter()
        .map(|&(x, y)| BlockRect {
            x: clamp_origin(x, block_size, width),
            y: clamp_origin(y, block_size, height),
            size: block_size,
        })
        .collect())
}

/// Maximum-likelihood Gaussian of one block's subband samples, ridge included.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDescriptor {
    pub mu: Vec<f64>,
    pub cov: SymMatrix,
    pub ridge: f64,
}

impl GaussianDescriptor {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Sample mean and divisor-`N` covariance of the block's per-pixel subband vectors.
pub fn block_moments(stack: &SubbandStack, rect: BlockRect) -> Result<(Vec<f64>, SymMatrix)> {
    if rect.x + rect.size > stack.width() || rect.y + rect.size > stack.height() {
        return Err(Error::BlockTooLarge {
            block_size: rect.size,
            width: stack.width(),
            height: stack.height(),
        });
    }
    let n = rect.size * rect.size;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let d = stack.len();
    let planes = stack.planes();
    let pixels = || {
        (rect.y..rect.y + rect.size).flat_map(move |y| (rect.x..rect.x + rect.size).map(move |x| (x, y)))
    };

    let mut mu = vec![0.0; d];
    for (x, y) in pixels() {
        for (m, plane) in mu.iter_mut().zip(planes) {
            *m += plane.get(x, y);
        }
    }
    for m in &mut mu {
        *m /= n as f64;
    }

    let mut acc = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for (x, y) in pixels() {
        for ((c, plane), m) in centered.iter_mut().zip(planes).zip(&mu) {
            *c = plane.get(x, y) - m;
        }
        for j in 0..d {
            let cj = centered[j];
            for i in 0..=j {
                acc[j * d + i] += centered[i] * cj;
            }
        }
    }
    let cov = SymMatrix::from_fn(d, |i, j| acc[j * d + i] / n as f64);
    Ok((mu, cov))
}

pub fn estimate_gaussian(stack: &SubbandStack, rect: BlockRect) -> Result<GaussianDescriptor> {
    let (mu, mut cov) = block_moments(stack, rect)?;
    let d = mu.len();
    let ridge = (RIDGE_RELATIVE * cov.trace() / d as f64).max(RIDGE_MIN);
    cov.add_ridge(ridge);
    Ok(GaussianDescriptor { mu, cov, ridge })
}

/// Half-vectorized embedding of one block Gaussian, length `(d+1)(d+2)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFeature(pub Vec<f64>);

/// Concatenation of all local features of an image, in block order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFeature(pub Vec<f64>);

impl ImageFeature {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub const fn local_feature_len(d: usize) -> usize {
    half_vec_len(d + 1)
}

pub fn block_feature(g: &GaussianDescriptor) -> Result<LocalFeature> {
    let embedded = embed_gaussian(&g.mu, &g.cov)?;
    Ok(LocalFeature(half_vectorize(embedded.matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLayout {
    Grid { block_size: usize },
    Keypoints { block_size: usize, count: usize },
}

impl BlockLayout {
    pub fn block_size(&self) -> usize {
        match *self {
            BlockLayout::Grid { block_size } | BlockLayout::Keypoints { block_size, .. } => {
                block_size
            }
        }
    }
}

/// Everything that determines how an image becomes a feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub gabor: GaborParams,
    pub preprocess: PreprocessParams,
    pub layout: BlockLayout,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            gabor: GaborParams::default(),
            preprocess: PreprocessParams::default(),
            layout: BlockLayout::Grid { block_size: 15 },
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.gabor.validate()?;
        self.preprocess.validate()?;
        match self.layout {
            BlockLayout::Grid { block_size } | BlockLayout::Keypoints { block_size, .. }
                if block_size < 2 =>
            {
                Err(Error::InvalidParams(format!(
                    "block_size {block_size} must be >= 2"
                )))
            }
            BlockLayout::Keypoints { count: 0, .. } => {
                Err(Error::InvalidParams("keypoint count must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Feature length for an image of the given size (grid layout) or for any
    /// image (keypoint layout).
    pub fn feature_len(&self, width: usize, height: usize) -> Result<usize> {
        let blocks = match self.layout {
            BlockLayout::Grid { block_size } => partition_blocks(width, height, block_size)?.len(),
            BlockLayout::Keypoints { count, .. } => count,
        };
        Ok(blocks * local_feature_len(self.gabor.subbands()))
    }
}

/// Reusable extractor holding the Gabor bank for one configuration.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    config: FeatureConfig,
    bank: GaborBank,
}

impl FeatureExtractor {
    pub fn new(config: FeatureConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            bank: GaborBank::new(config.gabor)?,
            config,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn bank(&self) -> &GaborBank {
        &self.bank
    }

    pub fn blocks(
        &self,
        width: usize,
        height: usize,
        keypoints: Option<&KeypointSet>,
    ) -> Result<Vec<BlockRect>> {
        match self.config.layout {
            BlockLayout::Grid { block_size } => {
                Ok(partition_blocks(width, height, block_size)?.rects())
            }
            BlockLayout::Keypoints { block_size, count } => {
                let kp = keypoints
                    .ok_or_else(|| Error::Keypoints("keypoint layout needs keypoints".into()))?;
                if kp.len() != count {
                    return Err(Error::Keypoints(format!(
                        "expected {count} keypoints, found {}",
                        kp.len()
                    )));
                }
                keypoint_blocks(width, height, kp, block_size)
            }
        }
    }

    /// Preprocess, decompose the whole image once, then describe every block.
    pub fn extract(&self, image: &Image, keypoints: Option<&KeypointSet>) -> Result<ImageFeature> {
        let blocks = self.blocks(image.width(), image.height(), keypoints)?;
        let normalized = preprocess_chain(image, &self.config.preprocess)?;
        let stack = self.bank.decompose(&normalized)?;
        self.describe_blocks(&stack, &blocks)
    }

    pub fn describe_blocks(&self, stack: &SubbandStack, blocks: &[BlockRect]) -> Result<ImageFeature> {
        let mut values = Vec::with_capacity(blocks.len() * local_feature_len(stack.len()));
        for &rect in blocks {
            let g = estimate_gaussian(stack, rect)?;
            values.extend(block_feature(&g)?.0);
        }
        Ok(ImageFeature(values))
    }
}

/// One-shot feature extraction; builds the bank on every call.
pub fn image_feature(
    image: &Image,
    config: &FeatureConfig,
    keypoints: Option<&KeypointSet>,
) -> Result<ImageFeature> {
    FeatureExtractor::new(*config)?.extract(image, keypoints)
}
