//! Binary gallery model format.
//!
//! ```text
//! "LGLG"  u16 version
//! config  u32 directions, u32 scales, f64 sigma, f64 k_max, f64 spacing, u32 window_len,
//!         f64 gamma, f64 dog_inner, f64 dog_outer, f64 alpha, f64 tau,
//!         u8 layout (0 grid, 1 keypoints), u32 block_size, u32 keypoint_count,
//!         u32 k_requested
//! dims    u64 input_dim, u64 output_dim, u64 entries
//! body    f64[input_dim] mean, f64[input_dim * output_dim] basis (column-major),
//!         f64[output_dim] eigenvalues,
//!         entries × (u32 id_len, id bytes, f64[output_dim] feature)
//! u32     CRC-32 of every preceding byte
//! ```
//!
//! All integers and floats are little-endian.

use std::path::Path;

use nalgebra::DMatrix;

use super::{Gallery, GalleryEntry, PipelineConfig};
use crate::descriptor::{BlockLayout, FeatureConfig};
use crate::error::{Error, Result};
use crate::gabor::GaborParams;
use crate::preprocess::PreprocessParams;
use crate::wpca::{ProjectionModel, StandardizedFeature};

pub const MAGIC: &[u8; 4] = b"LGLG";
pub const FORMAT_VERSION: u16 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend(v.to_le_bytes());
    }
    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v)
            .map_err(|_| Error::ModelFormat(format!("value {v} does not fit u32")))?;
        self.0.extend(v.to_le_bytes());
        Ok(())
    }
    fn u64(&mut self, v: usize) {
        self.0.extend((v as u64).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend(v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for &v in vs {
            self.f64(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::ModelFormat("unexpected end of data".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::ModelFormat("length overflow".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::ModelFormat("length overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn write_config(w: &mut Writer, config: &PipelineConfig) -> Result<()> {
    let g = &config.features.gabor;
    w.u32(g.directions)?;
    w.u32(g.scales)?;
    w.f64(g.sigma);
    w.f64(g.k_max);
    w.f64(g.spacing);
    w.u32(g.window_len)?;
    let p = &config.features.preprocess;
    w.f64(p.gamma);
    w.f64(p.dog_sigma_inner);
    w.f64(p.dog_sigma_outer);
    w.f64(p.contrast_alpha);
    w.f64(p.contrast_tau);
    match config.features.layout {
        BlockLayout::Grid { block_size } => {
            w.u8(0);
            w.u32(block_size)?;
            w.u32(0)?;
        }
        BlockLayout::Keypoints { block_size, count } => {
            w.u8(1);
            w.u32(block_size)?;
            w.u32(count)?;
        }
    }
    w.u32(config.k_requested)
}

fn read_config(r: &mut Reader) -> Result<PipelineConfig> {
    let gabor = GaborParams {
        directions: r.u32()?,
        scales: r.u32()?,
        sigma: r.f64()?,
        k_max: r.f64()?,
        spacing: r.f64()?,
        window_len: r.u32()?,
    };
    let preprocess = PreprocessParams {
        gamma: r.f64()?,
        dog_sigma_inner: r.f64()?,
        dog_sigma_outer: r.f64()?,
        contrast_alpha: r.f64()?,
        contrast_tau: r.f64()?,
    };
    let mode = r.u8()?;
    let block_size = r.u32()?;
    let count = r.u32()?;
    let layout = match mode {
        0 => BlockLayout::Grid { block_size },
        1 => BlockLayout::Keypoints { block_size, count },
        m => return Err(Error::ModelFormat(format!("unknown block layout {m}"))),
    };
    Ok(PipelineConfig {
        features: FeatureConfig {
            gabor,
            preprocess,
            layout,
        },
        k_requested: r.u32()?,
    })
}

/// Serializes the configuration block alone; used as the gallery fingerprint.
pub fn config_bytes(config: &PipelineConfig) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    write_config(&mut w, config)?;
    Ok(w.0)
}

pub fn encode(gallery: &Gallery) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u16(FORMAT_VERSION);
    write_config(&mut w, &gallery.config)?;

    let model = &gallery.model;
    w.u64(model.input_dim());
    w.u64(model.output_dim());
    w.u64(gallery.entries.len());
    w.f64s(model.train_mean());
    w.f64s(model.basis().as_slice());
    w.f64s(model.eigenvalues());
    for e in &gallery.entries {
        w.u32(e.subject_id.len())?;
        w.0.extend_from_slice(e.subject_id.as_bytes());
        w.f64s(e.feature.as_slice());
    }
    let crc = crc32fast::hash(&w.0);
    w.0.extend(crc.to_le_bytes());
    Ok(w.0)
}

pub fn decode(bytes: &[u8]) -> Result<Gallery> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::ModelFormat("missing LGLG magic".into()));
    }
    let mut r = Reader {
        buf: bytes,
        pos: MAGIC.len(),
    };
    let version = r.u16().map_err(|_| Error::ChecksumMismatch)?;
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < r.pos + 4 {
        return Err(Error::ChecksumMismatch);
    }
    let (payload, tail) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(payload) != u32::from_le_bytes(tail.try_into().unwrap()) {
        return Err(Error::ChecksumMismatch);
    }
    let mut r = Reader {
        buf: payload,
        pos: r.pos,
    };

    let config = read_config(&mut r)?;
    config
        .validate()
        .map_err(|e| Error::ModelFormat(format!("stored config is invalid: {e}")))?;
    let input_dim = r.u64()?;
    let output_dim = r.u64()?;
    let n_entries = r.u64()?;
    let mean = r.f64s(input_dim)?;
    let basis_len = input_dim
        .checked_mul(output_dim)
        .ok_or_else(|| Error::ModelFormat("length overflow".into()))?;
    let basis = DMatrix::from_vec(input_dim, output_dim, r.f64s(basis_len)?);
    let eigenvalues = r.f64s(output_dim)?;
    let model = ProjectionModel::from_parts(mean, basis, eigenvalues)?;

    let mut entries = Vec::new();
    for _ in 0..n_entries {
        let len = r.u32()?;
        let id = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::ModelFormat("subject id is not UTF-8".into()))?
            .to_string();
        entries.push(GalleryEntry {
            subject_id: id,
            feature: StandardizedFeature(r.f64s(output_dim)?),
        });
    }
    if r.pos != payload.len() {
        return Err(Error::ModelFormat("trailing bytes after entries".into()));
    }
    Ok(Gallery {
        config,
        model,
        entries,
    })
}

pub fn save_model(gallery: &Gallery, path: &Path) -> Result<()> {
    std::fs::write(path, encode(gallery)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Gallery> {
    decode(&std::fs::read(path)?)
}
