use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use warwalk::{RunConfig, SimSummary};

/// Everything needed to reproduce and audit one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub config: RunConfig,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub summary: SimSummary,
    /// Lower and upper bounds on the expected absorption time (sticky walk only).
    pub bounds: Option<(f64, f64)>,
    pub exact: Option<f64>,
    /// Variant-specific extras, e.g. the f-war cross-strength sum.
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
}

impl ExperimentManifest {
    pub fn new(config: RunConfig, summary: SimSummary, wall_time_seconds: f64) -> Self {
        Self {
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds,
            summary,
            bounds: None,
            exact: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
