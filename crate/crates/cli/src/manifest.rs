//! Run manifest written next to every report.

use std::fs;
use std::path::Path;

use convseq::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::commands::benchmark::Mode;
use crate::error::{CliError, IoContext, Result};
use crate::settings::Settings;
use crate::source::DatasetSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: PipelineConfig,
    pub tolerance: usize,
    pub t_e_max: f64,
    pub dataset: DatasetSource,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_range: Option<(usize, usize)>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings, dataset: &DatasetSource) -> Self {
        Self {
            tool: "convseq".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: settings.pipeline,
            tolerance: settings.tolerance,
            t_e_max: settings.t_e_max,
            seed: dataset.seed(),
            dataset: dataset.clone(),
            mode: None,
            k_range: None,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn settings(&self) -> Settings {
        Settings {
            pipeline: self.config,
            tolerance: self.tolerance,
            t_e_max: self.t_e_max,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| CliError::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}
