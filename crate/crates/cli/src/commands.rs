use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use lglg_core::pipeline::{enroll_records, identify_records, GALLERY_SUBSET};
use lglg_core::synthetic::{write_benchmark, SyntheticConfig};
use lglg_core::{
    evaluate, evaluation_csv, load_model, rank_accuracy, save_model, LoadOptions, Manifest,
    ManifestRecord,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::sweep::SweepGrid;

pub const IDENTIFY_HEADER: &str = "probe,true_subject,best_subject,distance,correct_rank";

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        Some(p) => RunConfig::read(p),
        None => Ok(RunConfig::default()),
    }
}

fn read_manifest(path: &Path) -> CliResult<Manifest> {
    Manifest::read(path).map_err(|e| match e {
        lglg_core::Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn load_options(flag: Option<&Path>, config: Option<&RunConfig>, jobs: usize) -> LoadOptions {
    LoadOptions {
        keypoints_dir: flag
            .map(Path::to_path_buf)
            .or_else(|| config.and_then(|c| c.keypoints_dir.clone())),
        jobs,
    }
}

fn load_gallery_model(path: &Path) -> CliResult<lglg_core::Gallery> {
    load_model(path).map_err(|e| match e {
        lglg_core::Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

pub struct EnrollSummary {
    pub subjects: usize,
    pub k: usize,
    pub feature_len: usize,
}

pub fn enroll(
    config: Option<&Path>,
    manifest: &Path,
    out: &Path,
    keypoints_dir: Option<&Path>,
    jobs: usize,
) -> CliResult<EnrollSummary> {
    let run = read_config(config)?;
    let pipeline = run.pipeline()?;
    let manifest = read_manifest(manifest)?;
    let opts = load_options(keypoints_dir, Some(&run), jobs);
    let gallery = enroll_records(&manifest.gallery(), &pipeline, &opts)?;
    save_model(&gallery, out).map_err(|e| match e {
        lglg_core::Error::Io(io) => CliError::Io(format!("{}: {io}", out.display())),
        other => other.into(),
    })?;
    Ok(EnrollSummary {
        subjects: gallery.entries().len(),
        k: gallery.output_dim(),
        feature_len: gallery.model().input_dim(),
    })
}

pub fn identify(
    model: &Path,
    manifest: &Path,
    keypoints_dir: Option<&Path>,
    jobs: usize,
) -> CliResult<String> {
    let gallery = load_gallery_model(model)?;
    let manifest = read_manifest(manifest)?;
    let opts = load_options(keypoints_dir, None, jobs);
    let results = identify_records(&gallery, &manifest.probes(), &opts)?;
    let mut out = format!("{IDENTIFY_HEADER}\n");
    for m in &results {
        let (best, dist) = m
            .ranking
            .first()
            .map(|(s, d)| (s.as_str(), format!("{d:.6}")))
            .unwrap_or(("", String::new()));
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            m.probe,
            m.true_subject.as_deref().unwrap_or(""),
            best,
            dist,
            m.correct_rank.map(|r| r.to_string()).unwrap_or_default()
        );
    }
    Ok(out)
}

pub fn evaluate_cmd(
    model: &Path,
    manifest: &Path,
    subsets: Option<&[String]>,
    keypoints_dir: Option<&Path>,
    jobs: usize,
) -> CliResult<String> {
    let gallery = load_gallery_model(model)?;
    let manifest = read_manifest(manifest)?;
    let opts = load_options(keypoints_dir, None, jobs);
    let reports = evaluate(&gallery, &manifest, subsets, &opts)?;
    Ok(evaluation_csv(&reports))
}

/// Rank-1 accuracy of every grid combination, one CSV row each in grid order.
pub fn sweep(
    base: Option<&Path>,
    grid: &Path,
    manifest: &Path,
    subset: Option<&str>,
    keypoints_dir: Option<&Path>,
    jobs: usize,
) -> CliResult<String> {
    let base = read_config(base)?;
    let grid_text = fs::read_to_string(grid)
        .map_err(|e| CliError::Io(format!("{}: {e}", grid.display())))?;
    let grid = SweepGrid::parse(&grid_text)?;
    let combos = grid.combinations(&base)?;
    for c in &combos {
        c.pipeline()?;
    }
    let manifest = read_manifest(manifest)?;
    let probes: Vec<&ManifestRecord> = manifest
        .probes()
        .into_iter()
        .filter(|r| subset.is_none_or(|s| r.subset == s))
        .collect();
    if probes.is_empty() {
        return Err(CliError::Data(match subset {
            Some(s) => format!("no probes in subset '{s}'"),
            None => format!("no probes (records not tagged '{GALLERY_SUBSET}')"),
        }));
    }

    let columns = grid.columns();
    let mut out = columns.join(",");
    out.push_str(",accuracy\n");
    for cfg in &combos {
        let pipeline = cfg.pipeline()?;
        let opts = load_options(keypoints_dir, Some(cfg), jobs);
        let gallery = enroll_records(&manifest.gallery(), &pipeline, &opts)?;
        let results = identify_records(&gallery, &probes, &opts)?;
        let acc = rank_accuracy(&results, 1)?;
        let row: Vec<String> = columns
            .iter()
            .map(|c| cfg.get(c).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "{},{acc:.4}", row.join(","));
    }
    Ok(out)
}

pub fn synth(out: &Path, cfg: &SyntheticConfig) -> CliResult<PathBuf> {
    write_benchmark(cfg, out).map_err(|e| match e {
        lglg_core::Error::Io(io) => CliError::Io(format!("{}: {io}", out.display())),
        other => other.into(),
    })
}
