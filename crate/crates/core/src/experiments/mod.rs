//! Runners for the rotation and mixture experiments.
//!
//! Each run writes `report.json` (configuration, per-replication rows and
//! summary), `summary.csv` and a long-format `long.csv` with columns
//! `replication,quantity,value` for plotting elsewhere. Reports contain no
//! timestamps, so a rerun with the same configuration reproduces the files
//! byte for byte.

mod config;
mod mixture;
mod rotation;
mod summary;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, MixtureConfig, RotationConfig};
pub use mixture::{mixture_target, run_mixture, MixtureReport, MixtureRow, MixtureSampler, ReferenceSummary, RhoRow};
pub use rotation::{run_rotation, RotationReport, RotationRow};
pub use summary::{long_csv, summary_csv, LongRow, SummaryRow};

use crate::chainfile::write_atomic;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentReport {
    Rotation(RotationReport),
    Mixture(MixtureReport),
}

impl ExperimentReport {
    pub fn summary(&self) -> &[SummaryRow] {
        match self {
            ExperimentReport::Rotation(r) => &r.summary,
            ExperimentReport::Mixture(r) => &r.summary,
        }
    }

    pub fn long_rows(&self) -> Vec<LongRow> {
        match self {
            ExperimentReport::Rotation(r) => r.long_rows(),
            ExperimentReport::Mixture(r) => r.long_rows(),
        }
    }

    /// Writes `report.json`, `summary.csv` and `long.csv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).expect("reports serialize");
        write_atomic(dir.join("report.json"), format!("{json}\n").as_bytes())?;
        write_atomic(dir.join("summary.csv"), summary_csv(self.summary()).as_bytes())?;
        write_atomic(dir.join("long.csv"), long_csv(&self.long_rows()).as_bytes())?;
        Ok(())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    Ok(match cfg {
        ExperimentConfig::Rotation(c) => ExperimentReport::Rotation(run_rotation(c)?),
        ExperimentConfig::Mixture(c) => ExperimentReport::Mixture(run_mixture(c)?),
    })
}
