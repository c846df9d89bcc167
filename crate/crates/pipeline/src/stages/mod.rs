//! Stage implementations. Each one validates and reads all of its input
//! before touching the output directory, fans records out over a bounded
//! rayon pool, collects results in input order and sorts by record id.

mod curate;
mod forge;
mod losscheck;
mod ocr_eval;
mod pairs;
mod reflect;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Stage, StageConfig};
use crate::manifest::{self, MANIFEST_FILE};
use crate::output::StagedOutput;
use crate::report::RunReport;
use crate::vlm::{Exchange, Gateway, VlmFailure};

pub use curate::{CurateInput, CurateRecord};
pub use forge::ForgeRecord;
pub use losscheck::{LossCase, LossResult};
pub use ocr_eval::{OcrInput, OcrLine};
pub use pairs::{PairsInput, PairsRecord};
pub use reflect::{ReflectInput, ReflectRecord};

/// Runs the configured stage, building the VLM gateway from `config.vlm`.
pub fn run_stage(config: &StageConfig) -> Result<RunReport> {
    config.validate()?;
    let gateway = Gateway::from_settings(&config.vlm)?;
    run_stage_with(config, &gateway)
}

/// Runs the configured stage against an explicit gateway.
pub fn run_stage_with(config: &StageConfig, gateway: &Gateway) -> Result<RunReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("starting worker pool")?;
    let ctx = Ctx { config, gateway, pool: &pool };
    match config.stage {
        Stage::Forge => forge::run(&ctx),
        Stage::Curate => curate::run(&ctx),
        Stage::Pairs => pairs::run(&ctx),
        Stage::Reflect => reflect::run(&ctx),
        Stage::OcrEval => ocr_eval::run(&ctx),
        Stage::Losscheck => losscheck::run(&ctx),
    }
}

struct Ctx<'a> {
    config: &'a StageConfig,
    gateway: &'a Gateway,
    pool: &'a rayon::ThreadPool,
}

impl Ctx<'_> {
    fn input(&self) -> &Path {
        self.config.input.as_deref().expect("validated: stage has an input")
    }

    /// Directory that relative paths inside the input manifest refer to.
    fn input_dir(&self) -> PathBuf {
        self.input().parent().map(Path::to_path_buf).unwrap_or_default()
    }

    fn read_input<T: serde::de::DeserializeOwned>(&self) -> Result<Vec<T>> {
        manifest::read_jsonl(self.input())
    }

    /// Maps `f` over `items` on the stage pool, keeping input order. The
    /// first hard error aborts the stage.
    fn map<T, U, F>(&self, items: &[T], f: F) -> Result<Vec<U>>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Result<U> + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(f).collect())
    }

    fn open_output(&self) -> Result<StagedOutput> {
        StagedOutput::prepare(&self.config.output, self.config.overwrite)
    }

    /// Writes the manifest and report into the staging directory and moves
    /// it into place.
    fn finish<R: Serialize>(&self, out: StagedOutput, records: &[R], mut report: RunReport) -> Result<RunReport> {
        report.records_out = records.len();
        report.manifest_sha256 = manifest::write_jsonl(&out.path().join(MANIFEST_FILE), records)?;
        report.write(out.path())?;
        out.commit()?;
        Ok(report)
    }
}

/// A response from a captured sidecar file or from the gateway.
#[derive(Debug, Clone)]
struct Fetched {
    raw: String,
    /// Cache key of a gateway response; sidecars have none.
    key: Option<String>,
}

impl Fetched {
    fn reference(&self, sidecar: &str) -> String {
        match &self.key {
            Some(k) => format!("response {k}"),
            None => format!("response file {sidecar}"),
        }
    }
}

/// Sidecar first, then the gateway.
fn fetch(
    gateway: &Gateway,
    sidecar_dir: Option<&Path>,
    sidecar: &str,
    request: impl FnOnce(&Gateway) -> Result<std::result::Result<Exchange, VlmFailure>>,
) -> Result<std::result::Result<Fetched, VlmFailure>> {
    if let Some(raw) = crate::vlm::read_sidecar(sidecar_dir, sidecar)? {
        return Ok(Ok(Fetched { raw, key: None }));
    }
    Ok(request(gateway)?.map(|ex| Fetched { raw: ex.raw, key: Some(ex.key) }))
}

fn failure_reason(f: &VlmFailure) -> &'static str {
    match f {
        VlmFailure::ReplayMiss { .. } => "replay_miss",
        VlmFailure::Client { .. } => "client_error",
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}
