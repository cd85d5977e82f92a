//! Flat `key=value` run configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lglg_core::{
    BlockLayout, FeatureConfig, GaborParams, PipelineConfig, PreprocessParams,
};

use crate::error::{CliError, CliResult};

pub const KEYS: [&str; 16] = [
    "window_len",
    "sigma_pi",
    "directions",
    "scales",
    "k_max",
    "spacing",
    "gamma",
    "dog_sigma_inner",
    "dog_sigma_outer",
    "contrast_alpha",
    "contrast_tau",
    "block_mode",
    "block_size",
    "keypoint_count",
    "k_requested",
    "keypoints_dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMode {
    Grid,
    Keypoints,
}

/// Every tunable of a run. `sigma_pi` is the Gabor envelope width in units of π.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub window_len: usize,
    pub sigma_pi: f64,
    pub directions: usize,
    pub scales: usize,
    pub k_max: f64,
    pub spacing: f64,
    pub gamma: f64,
    pub dog_sigma_inner: f64,
    pub dog_sigma_outer: f64,
    pub contrast_alpha: f64,
    pub contrast_tau: f64,
    pub block_mode: BlockMode,
    pub block_size: usize,
    pub keypoint_count: usize,
    pub k_requested: usize,
    pub keypoints_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let g = GaborParams::default();
        let p = PreprocessParams::default();
        let pipeline = PipelineConfig::default();
        Self {
            window_len: g.window_len,
            sigma_pi: g.sigma / PI,
            directions: g.directions,
            scales: g.scales,
            k_max: g.k_max,
            spacing: g.spacing,
            gamma: p.gamma,
            dog_sigma_inner: p.dog_sigma_inner,
            dog_sigma_outer: p.dog_sigma_outer,
            contrast_alpha: p.contrast_alpha,
            contrast_tau: p.contrast_tau,
            block_mode: BlockMode::Grid,
            block_size: pipeline.features.layout.block_size(),
            keypoint_count: lglg_core::descriptor::DEFAULT_KEYPOINT_COUNT,
            k_requested: pipeline.k_requested,
            keypoints_dir: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{value}'")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "window_len" => self.window_len = parse_num(key, value)?,
            "sigma_pi" => self.sigma_pi = parse_num(key, value)?,
            "directions" => self.directions = parse_num(key, value)?,
            "scales" => self.scales = parse_num(key, value)?,
            "k_max" => self.k_max = parse_num(key, value)?,
            "spacing" => self.spacing = parse_num(key, value)?,
            "gamma" => self.gamma = parse_num(key, value)?,
            "dog_sigma_inner" => self.dog_sigma_inner = parse_num(key, value)?,
            "dog_sigma_outer" => self.dog_sigma_outer = parse_num(key, value)?,
            "contrast_alpha" => self.contrast_alpha = parse_num(key, value)?,
            "contrast_tau" => self.contrast_tau = parse_num(key, value)?,
            "block_mode" => {
                self.block_mode = match value {
                    "grid" => BlockMode::Grid,
                    "keypoints" => BlockMode::Keypoints,
                    _ => {
                        return Err(CliError::Config(format!(
                            "block_mode must be grid or keypoints, got '{value}'"
                        )))
                    }
                }
            }
            "block_size" => self.block_size = parse_num(key, value)?,
            "keypoint_count" => self.keypoint_count = parse_num(key, value)?,
            "k_requested" => self.k_requested = parse_num(key, value)?,
            "keypoints_dir" => self.keypoints_dir = Some(PathBuf::from(value)),
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "window_len" => self.window_len.to_string(),
            "sigma_pi" => self.sigma_pi.to_string(),
            "directions" => self.directions.to_string(),
            "scales" => self.scales.to_string(),
            "k_max" => self.k_max.to_string(),
            "spacing" => self.spacing.to_string(),
            "gamma" => self.gamma.to_string(),
            "dog_sigma_inner" => self.dog_sigma_inner.to_string(),
            "dog_sigma_outer" => self.dog_sigma_outer.to_string(),
            "contrast_alpha" => self.contrast_alpha.to_string(),
            "contrast_tau" => self.contrast_tau.to_string(),
            "block_mode" => match self.block_mode {
                BlockMode::Grid => "grid".into(),
                BlockMode::Keypoints => "keypoints".into(),
            },
            "block_size" => self.block_size.to_string(),
            "keypoint_count" => self.keypoint_count.to_string(),
            "k_requested" => self.k_requested.to_string(),
            "keypoints_dir" => self.keypoints_dir.as_ref()?.display().to_string(),
            _ => return None,
        })
    }

    /// Parses config text over the defaults. Blank lines and `#` comments are
    /// ignored; a relative `keypoints_dir` resolves against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key=value", n + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(CliError::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
            seen.push(key);
            cfg.set(key, value)
                .map_err(|e| CliError::Config(format!("line {}: {}", n + 1, e.message())))?;
        }
        if let (Some(base), Some(dir)) = (base_dir, &cfg.keypoints_dir) {
            if dir.is_relative() {
                cfg.keypoints_dir = Some(base.join(dir));
            }
        }
        cfg.pipeline()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.get(key) {
                let _ = writeln!(out, "{key}={v}");
            }
        }
        out
    }

    /// The validated library configuration.
    pub fn pipeline(&self) -> CliResult<PipelineConfig> {
        let layout = match self.block_mode {
            BlockMode::Grid => BlockLayout::Grid {
                block_size: self.block_size,
            },
            BlockMode::Keypoints => BlockLayout::Keypoints {
                block_size: self.block_size,
                count: self.keypoint_count,
            },
        };
        let config = PipelineConfig {
            features: FeatureConfig {
                gabor: GaborParams {
                    directions: self.directions,
                    scales: self.scales,
                    sigma: self.sigma_pi * PI,
                    k_max: self.k_max,
                    spacing: self.spacing,
                    window_len: self.window_len,
                },
                preprocess: PreprocessParams {
                    gamma: self.gamma,
                    dog_sigma_inner: self.dog_sigma_inner,
                    dog_sigma_outer: self.dog_sigma_outer,
                    contrast_alpha: self.contrast_alpha,
                    contrast_tau: self.contrast_tau,
                },
                layout,
            },
            k_requested: self.k_requested,
        };
        config
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }
}
