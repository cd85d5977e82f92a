//! Batch front end for enrollment, identification, evaluation and sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lglg_core::synthetic::SyntheticConfig;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "lglg", version, about = "Gabor Log-Euclidean Gaussian texture identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory of `<image stem>.txt` keypoint files (keypoint block mode).
    #[arg(long)]
    pub keypoints_dir: Option<PathBuf>,
    /// Feature extraction threads; 1 runs serially.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the projection on the manifest's gallery records and write a model.
    Enroll {
        /// key=value run configuration; library defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: PathBuf,
        /// Model file to write.
        #[arg(long, alias = "model")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Nearest gallery subject for every probe record.
    Identify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Rank-1 and rank-5 accuracy per probe subset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subsets to report; all probe subsets when omitted.
        #[arg(long, value_delimiter = ',')]
        subsets: Option<Vec<String>>,
        #[command(flatten)]
        common: Common,
    },
    /// Enroll and score every combination of a parameter grid.
    Sweep {
        /// Base configuration the grid overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid file, one `key=v1,v2,...` line per swept key.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Score only this probe subset.
        #[arg(long)]
        subset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Write the oriented-grating benchmark as PGMs plus a manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 5)]
        probes: usize,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Enroll {
            config,
            manifest,
            out,
            common,
        } => {
            let s = commands::enroll(
                config.as_deref(),
                &manifest,
                &out,
                common.keypoints_dir.as_deref(),
                common.jobs,
            )?;
            println!(
                "enrolled {} subjects: k={} feature_len={}",
                s.subjects, s.k, s.feature_len
            );
            Ok(())
        }
        Command::Identify {
            model,
            manifest,
            out,
            common,
        } => {
            let csv = commands::identify(
                &model,
                &manifest,
                common.keypoints_dir.as_deref(),
                common.jobs,
            )?;
            commands::emit(out.as_deref(), &csv)
        }
        Command::Evaluate {
            model,
            manifest,
            out,
            subsets,
            common,
        } => {
            let csv = commands::evaluate_cmd(
                &model,
                &manifest,
                subsets.as_deref(),
                common.keypoints_dir.as_deref(),
                common.jobs,
            )?;
            commands::emit(out.as_deref(), &csv)
        }
        Command::Sweep {
            config,
            grid,
            manifest,
            out,
            subset,
            common,
        } => {
            let csv = commands::sweep(
                config.as_deref(),
                &grid,
                &manifest,
                subset.as_deref(),
                common.keypoints_dir.as_deref(),
                common.jobs,
            )?;
            commands::emit(out.as_deref(), &csv)
        }
        Command::Synth {
            out,
            classes,
            size,
            probes,
            noise,
            seed,
        } => {
            if classes < 2 || size < 16 || !(noise >= 0.0 && noise.is_finite()) {
                return Err(CliError::Config(
                    "synth needs classes >= 2, size >= 16 and a finite noise >= 0".into(),
                ));
            }
            let cfg = SyntheticConfig {
                classes,
                size,
                probes_per_class: probes,
                noise_sigma: noise,
                seed,
            };
            let manifest = commands::synth(&out, &cfg)?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}
