use std::collections::HashSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const MANIFEST_HEADER: [&str; 3] = ["path", "subject_id", "subset"];

/// Subset tag that marks enrollment images.
pub const GALLERY_SUBSET: &str = "gallery";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub path: PathBuf,
    pub subject_id: String,
    pub subset: String,
}

/// Labelled image list read from a `path,subject_id,subset` CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub records: Vec<ManifestRecord>,
}

impl Manifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if r.subject_id.is_empty() {
                return Err(Error::Manifest(format!(
                    "{}: empty subject_id",
                    r.path.display()
                )));
            }
            if !seen.insert(&r.path) {
                return Err(Error::Manifest(format!(
                    "duplicate path {}",
                    r.path.display()
                )));
            }
        }
        Ok(Self { records })
    }

    /// Parses CSV text. Relative paths are joined onto `base_dir` when given.
    pub fn parse<R: Read>(reader: R, base_dir: Option<&Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .quoting(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Manifest(e.to_string()))?
            .clone();
        if header.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
            return Err(Error::Manifest(format!(
                "header must be '{}'",
                MANIFEST_HEADER.join(",")
            )));
        }
        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| Error::Manifest(e.to_string()))?;
            let path = PathBuf::from(&row[0]);
            let path = match base_dir {
                Some(base) if path.is_relative() => base.join(path),
                _ => path,
            };
            records.push(ManifestRecord {
                path,
                subject_id: row[1].to_string(),
                subset: row[2].to_string(),
            });
        }
        Self::new(records)
    }

    /// Reads a manifest file; relative image paths resolve against its directory.
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse(file, path.parent())
    }

    pub fn gallery(&self) -> Vec<&ManifestRecord> {
        self.records
            .iter()
            .filter(|r| r.subset == GALLERY_SUBSET)
            .collect()
    }

    pub fn probes(&self) -> Vec<&ManifestRecord> {
        self.records
            .iter()
            .filter(|r| r.subset != GALLERY_SUBSET)
            .collect()
    }

    /// Probe subset names in order of first appearance.
    pub fn probe_subsets(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in self.probes() {
            if !out.contains(&r.subset) {
                out.push(r.subset.clone());
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = MANIFEST_HEADER.join(",");
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{}\n",
                r.path.display(),
                r.subject_id,
                r.subset
            ));
        }
        out
    }
}
