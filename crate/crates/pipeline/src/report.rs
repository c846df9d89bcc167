use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

pub const REPORT_FILE: &str = "report.json";

/// Summary of one stage run. It holds no timings or host details, so two
/// identical runs produce identical reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub stage: String,
    pub records_in: usize,
    pub records_out: usize,
    /// Record counts per outcome (`accepted` or a rejection reason) plus any
    /// stage-specific tallies.
    pub counts: BTreeMap<String, usize>,
    pub manifest: String,
    pub manifest_sha256: String,
}

impl RunReport {
    pub fn new(stage: &str) -> Self {
        Self {
            stage: stage.to_string(),
            records_in: 0,
            records_out: 0,
            counts: BTreeMap::new(),
            manifest: crate::manifest::MANIFEST_FILE.to_string(),
            manifest_sha256: String::new(),
        }
    }

    pub fn bump(&mut self, key: &str) {
        self.add(key, 1);
    }

    pub fn add(&mut self, key: &str, n: usize) {
        *self.counts.entry(key.to_string()).or_default() += n;
    }

    pub fn count(&self, key: &str) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(REPORT_FILE), text)?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let counts: Vec<String> = self.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{}: {} in, {} out [{}] manifest sha256 {}",
            self.stage,
            self.records_in,
            self.records_out,
            counts.join(" "),
            self.manifest_sha256
        )
    }
}
