//! Gabor Log-Euclidean Gaussian texture features.
//!
//! An image is illumination-normalized, decomposed by a complex Gabor bank,
//! cut into square blocks (a centred grid or blocks around supplied
//! landmarks), and each block's subband magnitudes are modelled as a
//! multivariate Gaussian. The Gaussians are embedded into a flat space with
//! the Log-Euclidean map, concatenated, whitened by PCA and z-scored; gallery
//! matching is nearest neighbour under the Euclidean distance.
//!
//! ```no_run
//! use lglg_core::synthetic::{benchmark, SyntheticConfig};
//! use lglg_core::{rank_accuracy, Gallery, PipelineConfig};
//!
//! let set = benchmark(&SyntheticConfig::default());
//! let config = PipelineConfig::default();
//! let gallery = Gallery::enroll(&set.gallery, &config, 1).unwrap();
//! let results: Vec<_> = set
//!     .probes
//!     .iter()
//!     .map(|p| gallery.identify(p, &config.features, None).unwrap())
//!     .collect();
//! println!("rank-1: {}", rank_accuracy(&results, 1).unwrap());
//! ```

pub mod conv;
pub mod descriptor;
pub mod error;
pub mod gabor;
pub mod image;
pub mod pipeline;
pub mod preprocess;
pub mod spd;
pub mod synthetic;
pub mod wpca;

pub use conv::ConvBackend;
pub use descriptor::{
    BlockGrid, BlockLayout, BlockRect, FeatureConfig, FeatureExtractor, GaussianDescriptor,
    ImageFeature, KeypointSet, LocalFeature,
};
pub use error::{Error, Result};
pub use gabor::{GaborBank, GaborKernel, GaborParams, SubbandStack};
pub use image::Image;
pub use pipeline::{
    evaluate, evaluation_csv, load_model, rank_accuracy, save_model, Gallery, LoadOptions,
    Manifest, ManifestRecord, MatchResult, PipelineConfig, Sample, SubsetReport,
};
pub use preprocess::PreprocessParams;
pub use spd::{EigenDecomposition, EmbeddedGaussian, SymMatrix};
pub use wpca::{ProjectionModel, StandardizedFeature};
