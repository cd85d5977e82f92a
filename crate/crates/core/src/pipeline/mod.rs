//! Enrollment, identification and evaluation on top of the feature extractor.

pub mod manifest;
pub mod model_file;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::descriptor::{BlockLayout, FeatureConfig, FeatureExtractor, ImageFeature, KeypointSet};
use crate::error::{Error, Result};
use crate::image::{read_pgm, Image};
use crate::wpca::{self, ProjectionModel, StandardizedFeature};

pub use manifest::{Manifest, ManifestRecord, GALLERY_SUBSET};
pub use model_file::{load_model, save_model};

/// Default number of WPCA components requested; capped at the training rank.
pub const DEFAULT_K_REQUESTED: usize = 1196;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub k_requested: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            k_requested: DEFAULT_K_REQUESTED,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if self.k_requested == 0 || self.k_requested > u32::MAX as usize {
            return Err(Error::InvalidParams(format!(
                "k_requested {} out of range",
                self.k_requested
            )));
        }
        Ok(())
    }
}

/// One labelled image held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: String,
    pub subject_id: String,
    pub image: Image,
    pub keypoints: Option<KeypointSet>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub subject_id: String,
    pub feature: StandardizedFeature,
}

/// Enrolled subjects with the projection fitted on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    pub(crate) config: PipelineConfig,
    pub(crate) model: ProjectionModel,
    pub(crate) entries: Vec<GalleryEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub probe: String,
    /// Gallery subjects by ascending distance; ties keep enrollment order.
    pub ranking: Vec<(String, f64)>,
    pub true_subject: Option<String>,
    /// 1-based rank of the first gallery entry with the true subject.
    pub correct_rank: Option<usize>,
}

impl Gallery {
    /// Fits the projection on the gallery features and stores their
    /// standardized projections.
    pub fn from_features(
        config: PipelineConfig,
        subjects: Vec<String>,
        features: &[ImageFeature],
    ) -> Result<Gallery> {
        config.validate()?;
        if subjects.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: subjects.len(),
                actual: features.len(),
            });
        }
        let rows: Vec<&[f64]> = features.iter().map(ImageFeature::as_slice).collect();
        let model = wpca::fit(&rows, config.k_requested)?;
        let mut gallery = Gallery {
            config,
            model,
            entries: Vec::with_capacity(subjects.len()),
        };
        for (subject_id, f) in subjects.into_iter().zip(features) {
            let feature = gallery.standardize(f)?;
            gallery.entries.push(GalleryEntry {
                subject_id,
                feature,
            });
        }
        Ok(gallery)
    }

    /// Extracts and enrolls in-memory samples in order.
    pub fn enroll(samples: &[Sample], config: &PipelineConfig, jobs: usize) -> Result<Gallery> {
        let extractor = FeatureExtractor::new(config.features)?;
        let features = map_jobs(samples, jobs, |s| {
            extractor
                .extract(&s.image, s.keypoints.as_ref())
                .map_err(|e| Error::at(&s.label, e))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let subjects = samples.iter().map(|s| s.subject_id.clone()).collect();
        Gallery::from_features(*config, subjects, &features)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn model(&self) -> &ProjectionModel {
        &self.model
    }

    pub fn entries(&self) -> &[GalleryEntry] {
        &self.entries
    }

    pub fn output_dim(&self) -> usize {
        self.model.output_dim()
    }

    pub fn check_config(&self, config: &FeatureConfig) -> Result<()> {
        if *config == self.config.features {
            Ok(())
        } else {
            Err(Error::ConfigMismatch)
        }
    }

    pub fn standardize(&self, feature: &ImageFeature) -> Result<StandardizedFeature> {
        wpca::zscore(&self.model.project(feature.as_slice())?)
    }

    pub fn rank(
        &self,
        probe: &str,
        z: &StandardizedFeature,
        true_subject: Option<&str>,
    ) -> MatchResult {
        let mut ranking: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.subject_id.clone(), e.feature.distance(z)))
            .collect();
        ranking.sort_by(|a, b| a.1.total_cmp(&b.1));
        let correct_rank = true_subject
            .and_then(|t| ranking.iter().position(|(s, _)| s == t))
            .map(|p| p + 1);
        MatchResult {
            probe: probe.to_string(),
            ranking,
            true_subject: true_subject.map(str::to_string),
            correct_rank,
        }
    }

    pub fn identify_feature(
        &self,
        probe: &str,
        feature: &ImageFeature,
        true_subject: Option<&str>,
    ) -> Result<MatchResult> {
        Ok(self.rank(probe, &self.standardize(feature)?, true_subject))
    }

    /// Identifies one probe image extracted with `config`, which must match
    /// the configuration the gallery was enrolled with.
    pub fn identify(
        &self,
        probe: &Sample,
        config: &FeatureConfig,
        extractor: Option<&FeatureExtractor>,
    ) -> Result<MatchResult> {
        self.check_config(config)?;
        let owned;
        let extractor = match extractor {
            Some(e) if e.config() == config => e,
            _ => {
                owned = FeatureExtractor::new(*config)?;
                &owned
            }
        };
        let feature = extractor
            .extract(&probe.image, probe.keypoints.as_ref())
            .map_err(|e| Error::at(&probe.label, e))?;
        self.identify_feature(&probe.label, &feature, Some(&probe.subject_id))
    }
}

/// Fraction of results whose true subject appears within the first `r` ranks.
/// An empty result list yields 0.
pub fn rank_accuracy(results: &[MatchResult], r: usize) -> Result<f64> {
    if results.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for m in results {
        if m.true_subject.is_none() {
            return Err(Error::MissingGroundTruth(m.probe.clone()));
        }
        if m.correct_rank.is_some_and(|c| c <= r) {
            hits += 1;
        }
    }
    Ok(hits as f64 / results.len() as f64)
}

fn map_jobs<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}

/// How manifest records are turned into samples.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Directory holding `<image stem>.txt` keypoint files (keypoint layout only).
    pub keypoints_dir: Option<PathBuf>,
    /// Worker threads for feature extraction; `0` or `1` runs serially.
    pub jobs: usize,
}

pub fn keypoint_path(dir: &Path, image: &Path) -> PathBuf {
    let stem = image.file_stem().unwrap_or_default().to_string_lossy();
    dir.join(format!("{stem}.txt"))
}

pub fn load_sample(
    record: &ManifestRecord,
    layout: &BlockLayout,
    opts: &LoadOptions,
) -> Result<Sample> {
    let wrap = |e| Error::at(&record.path, e);
    let image = read_pgm(&record.path).map_err(wrap)?;
    let keypoints = match layout {
        BlockLayout::Grid { .. } => None,
        BlockLayout::Keypoints { .. } => {
            let dir = opts.keypoints_dir.as_deref().ok_or_else(|| {
                wrap(Error::Keypoints("keypoint layout requires a keypoints directory".into()))
            })?;
            let kp_path = keypoint_path(dir, &record.path);
            Some(KeypointSet::read(&kp_path).map_err(|e| Error::at(&kp_path, e))?)
        }
    };
    Ok(Sample {
        label: record.path.display().to_string(),
        subject_id: record.subject_id.clone(),
        image,
        keypoints,
    })
}

/// Loads and extracts every record, preserving record order.
pub fn extract_records(
    extractor: &FeatureExtractor,
    records: &[&ManifestRecord],
    opts: &LoadOptions,
) -> Result<Vec<ImageFeature>> {
    map_jobs(records, opts.jobs, |r| {
        let s = load_sample(r, &extractor.config().layout, opts)?;
        extractor
            .extract(&s.image, s.keypoints.as_ref())
            .map_err(|e| Error::at(&r.path, e))
    })
    .into_iter()
    .collect()
}

pub fn enroll_records(
    records: &[&ManifestRecord],
    config: &PipelineConfig,
    opts: &LoadOptions,
) -> Result<Gallery> {
    config.validate()?;
    if records.len() < 2 {
        return Err(Error::DegenerateTrainingSet);
    }
    let extractor = FeatureExtractor::new(config.features)?;
    let features = extract_records(&extractor, records, opts)?;
    let subjects = records.iter().map(|r| r.subject_id.clone()).collect();
    Gallery::from_features(*config, subjects, &features)
}

pub fn identify_records(
    gallery: &Gallery,
    records: &[&ManifestRecord],
    opts: &LoadOptions,
) -> Result<Vec<MatchResult>> {
    let extractor = FeatureExtractor::new(gallery.config.features)?;
    let features = extract_records(&extractor, records, opts)?;
    records
        .iter()
        .zip(&features)
        .map(|(r, f)| {
            gallery
                .identify_feature(&r.path.display().to_string(), f, Some(&r.subject_id))
                .map_err(|e| Error::at(&r.path, e))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetReport {
    pub subset: String,
    pub n_probes: usize,
    pub rank1: Option<f64>,
    pub rank5: Option<f64>,
}

/// Rank-1/rank-5 accuracy per probe subset. `subsets` defaults to the
/// manifest's probe subsets in order of appearance; requested subsets with
/// no records report `n_probes = 0`.
pub fn evaluate(
    gallery: &Gallery,
    manifest: &Manifest,
    subsets: Option<&[String]>,
    opts: &LoadOptions,
) -> Result<Vec<SubsetReport>> {
    let names = match subsets {
        Some(s) => s.to_vec(),
        None => manifest.probe_subsets(),
    };
    let probes = manifest.probes();
    let results = identify_records(gallery, &probes, opts)?;
    names
        .into_iter()
        .map(|subset| {
            let hits: Vec<MatchResult> = probes
                .iter()
                .zip(&results)
                .filter(|(r, _)| r.subset == subset)
                .map(|(_, m)| m.clone())
                .collect();
            let (rank1, rank5) = if hits.is_empty() {
                (None, None)
            } else {
                (Some(rank_accuracy(&hits, 1)?), Some(rank_accuracy(&hits, 5)?))
            };
            Ok(SubsetReport {
                subset,
                n_probes: hits.len(),
                rank1,
                rank5,
            })
        })
        .collect()
}

pub const EVALUATION_HEADER: &str = "subset,n_probes,rank1,rank5";

pub fn evaluation_csv(reports: &[SubsetReport]) -> String {
    let fmt = |v: Option<f64>| v.map(|a| format!("{a:.4}")).unwrap_or_default();
    let mut out = format!("{EVALUATION_HEADER}\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.subset,
            r.n_probes,
            fmt(r.rank1),
            fmt(r.rank5)
        ));
    }
    out
}
