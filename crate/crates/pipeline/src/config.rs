use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use posterkit_core::curation::CurationConfig;
use posterkit_core::forge::GenerationConfig;
use posterkit_core::loss::Schedule;
use serde::{Deserialize, Serialize};

use crate::vlm::VlmSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Forge,
    Curate,
    Pairs,
    Reflect,
    OcrEval,
    Losscheck,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Forge => "forge",
            Stage::Curate => "curate",
            Stage::Pairs => "pairs",
            Stage::Reflect => "reflect",
            Stage::OcrEval => "ocr-eval",
            Stage::Losscheck => "losscheck",
        }
    }
}

fn one() -> usize {
    1
}

/// One stage invocation, usually read from a TOML file. Relative paths are
/// resolved against the file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub stage: Stage,
    #[serde(default)]
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Replace an existing output directory instead of refusing to run.
    #[serde(default)]
    pub overwrite: bool,
    #[serde(default)]
    pub vlm: VlmSettings,
    #[serde(default)]
    pub forge: Option<ForgeParams>,
    #[serde(default)]
    pub curate: Option<CurateParams>,
    #[serde(default)]
    pub pairs: Option<PairsParams>,
    #[serde(default)]
    pub reflect: Option<ReflectParams>,
    #[serde(default)]
    pub ocr_eval: Option<OcrEvalParams>,
    #[serde(default)]
    pub losscheck: Option<LosscheckParams>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeParams {
    pub count: u64,
    #[serde(default)]
    pub fonts: Option<PathBuf>,
    #[serde(default)]
    pub backgrounds: Option<PathBuf>,
    #[serde(default)]
    pub vocabulary: Option<PathBuf>,
    /// Number of generated backgrounds when no background directory is set.
    #[serde(default = "default_procedural")]
    pub procedural_backgrounds: u32,
    #[serde(default = "yes")]
    pub write_images: bool,
    /// `master_seed` here is ignored; the stage seed is used.
    #[serde(default)]
    pub generation: GenerationConfig,
}

fn default_procedural() -> u32 {
    64
}

fn yes() -> bool {
    true
}

impl Default for ForgeParams {
    fn default() -> Self {
        Self {
            count: 0,
            fonts: None,
            backgrounds: None,
            vocabulary: None,
            procedural_backgrounds: default_procedural(),
            write_images: true,
            generation: GenerationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurateParams {
    /// Directory of captured `<id>.text_regions.json` responses.
    #[serde(default)]
    pub responses: Option<PathBuf>,
    /// Ask for text-region masks at all. Without masks every accepted
    /// poster gets a uniform weight map.
    #[serde(default = "yes")]
    pub masks: bool,
    #[serde(default)]
    pub thresholds: CurationConfig,
}

impl Default for CurateParams {
    fn default() -> Self {
        Self { responses: None, masks: true, thresholds: CurationConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsParams {
    /// Directory of captured `<prompt_id>.verdict.json` responses.
    #[serde(default)]
    pub responses: Option<PathBuf>,
    #[serde(default = "default_gap")]
    pub min_gap: f64,
}

fn default_gap() -> f64 {
    posterkit_core::pairs::DEFAULT_MIN_GAP
}

impl Default for PairsParams {
    fn default() -> Self {
        Self { responses: None, min_gap: default_gap() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectParams {
    /// Directory of captured `<prompt_id>.best.json` and
    /// `<prompt_id>.feedback.<source_index>.json` responses.
    #[serde(default)]
    pub responses: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcrEvalParams {
    /// Directory of captured `<id>.ocr.json` evaluator responses, used for
    /// records that carry an image instead of `ocr_text`.
    #[serde(default)]
    pub responses: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LosscheckParams {
    #[serde(default)]
    pub schedule: Schedule,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

impl StageConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_inner(path, None)
    }

    /// Loads a config for `stage`. The file may omit `stage`; if it names a
    /// different one, loading fails.
    pub fn load_for(path: &Path, stage: Stage) -> Result<Self> {
        Self::load_inner(path, Some(stage))
    }

    fn load_inner(path: &Path, stage: Option<Stage>) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(stage) = stage {
            match table.get("stage").and_then(|v| v.as_str()) {
                None if !table.contains_key("stage") => {
                    table.insert("stage".into(), toml::Value::String(stage.as_str().into()));
                }
                Some(s) if s == stage.as_str() => {}
                other => bail!("config {} is for stage {:?}, not {}", path.display(), other, stage.as_str()),
            }
        }
        let mut config: StageConfig =
            table.try_into().with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve_opt(base, &mut self.input);
        resolve(base, &mut self.output);
        resolve_opt(base, &mut self.vlm.cache_dir);
        if let Some(f) = &mut self.forge {
            resolve_opt(base, &mut f.fonts);
            resolve_opt(base, &mut f.backgrounds);
            resolve_opt(base, &mut f.vocabulary);
        }
        if let Some(c) = &mut self.curate {
            resolve_opt(base, &mut c.responses);
        }
        if let Some(p) = &mut self.pairs {
            resolve_opt(base, &mut p.responses);
        }
        if let Some(r) = &mut self.reflect {
            resolve_opt(base, &mut r.responses);
        }
        if let Some(o) = &mut self.ocr_eval {
            resolve_opt(base, &mut o.responses);
        }
    }

    /// Checks everything that can be checked without reading inputs.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        let blocks = [
            (Stage::Forge, self.forge.is_some()),
            (Stage::Curate, self.curate.is_some()),
            (Stage::Pairs, self.pairs.is_some()),
            (Stage::Reflect, self.reflect.is_some()),
            (Stage::OcrEval, self.ocr_eval.is_some()),
            (Stage::Losscheck, self.losscheck.is_some()),
        ];
        for (stage, present) in blocks {
            if present && stage != self.stage {
                bail!("config has a parameter block for {} but the stage is {}", stage.as_str(), self.stage.as_str());
            }
        }
        match (self.stage, &self.input) {
            (Stage::Forge, Some(_)) => bail!("forge takes no input manifest"),
            (Stage::Forge, None) => {}
            (_, None) => bail!("{} needs an input manifest", self.stage.as_str()),
            (_, Some(input)) => {
                if !input.is_file() {
                    bail!("input manifest {} does not exist", input.display());
                }
                if same_path(input, &self.output) || input.starts_with(&self.output) {
                    bail!("output {} must not contain the input", self.output.display());
                }
            }
        }
        if self.stage == Stage::Forge {
            let params = self.forge.as_ref().context("forge needs a [forge] block with `count`")?;
            params.generation.validate()?;
        }
        if let Some(p) = &self.pairs {
            if !(p.min_gap.is_finite() && p.min_gap >= 0.0) {
                bail!("pairs.min_gap must be a non-negative number");
            }
        }
        if let Some(c) = &self.curate {
            let t = &c.thresholds;
            if !(0.0..=1.0).contains(&t.binary_threshold) || !(0.0..=1.0).contains(&t.major_fraction_threshold) {
                bail!("curate thresholds must lie in [0, 1]");
            }
            if t.hamming_threshold > 64 {
                bail!("curate.thresholds.hamming_threshold must be at most 64");
            }
        }
        self.vlm.validate()?;
        Ok(())
    }
}

fn same_path(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}
