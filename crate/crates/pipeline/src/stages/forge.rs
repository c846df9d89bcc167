use std::fs;

use anyhow::{Context, Result};
use image::ImageFormat;
use posterkit_core::forge::{BackgroundSource, Forge, FontLibrary, Grammar, SamplePlan};
use serde::{Deserialize, Serialize};

use super::Ctx;
use crate::manifest::sha256_hex;
use crate::report::RunReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgeRecord {
    pub id: String,
    /// Path of the rendered PNG relative to the output directory.
    #[serde(default)]
    pub image: Option<String>,
    #[serde(default)]
    pub image_sha256: Option<String>,
    #[serde(flatten)]
    pub plan: SamplePlan,
}

pub fn sample_id(index: u64) -> String {
    format!("sample-{index:07}")
}

fn build(ctx: &Ctx) -> Result<Forge> {
    let params = ctx.config.forge.as_ref().expect("validated: forge block present");
    let mut generation = params.generation.clone();
    generation.master_seed = ctx.config.master_seed;
    let grammar = match &params.vocabulary {
        Some(dir) => Grammar::load_dir(dir)?,
        None => Grammar::builtin(),
    };
    let fonts = match &params.fonts {
        Some(dir) => FontLibrary::load_dir(dir)?,
        None => FontLibrary::builtin(),
    };
    let backgrounds = match &params.backgrounds {
        Some(dir) => BackgroundSource::load_dir(dir)?,
        None => BackgroundSource::Procedural { count: params.procedural_backgrounds },
    };
    Ok(Forge::new(generation, grammar, fonts, backgrounds)?)
}

pub(super) fn run(ctx: &Ctx) -> Result<RunReport> {
    let params = ctx.config.forge.as_ref().expect("validated: forge block present");
    let forge = build(ctx)?;
    let out = ctx.open_output()?;
    let images = out.path().join("images");
    if params.write_images {
        fs::create_dir(&images)?;
    }
    let indices: Vec<u64> = (0..params.count).collect();
    let records = ctx.map(&indices, |&index| {
        let id = sample_id(index);
        let plan = forge.plan(index);
        let (image, image_sha256) = if params.write_images {
            let rgb = forge.render(&plan).with_context(|| format!("rendering {id}"))?;
            let mut png = std::io::Cursor::new(Vec::new());
            rgb.write_to(&mut png, ImageFormat::Png)?;
            let png = png.into_inner();
            let name = format!("images/{id}.png");
            fs::write(out.path().join(&name), &png).with_context(|| format!("writing {name}"))?;
            (Some(name), Some(sha256_hex(&png)))
        } else {
            (None, None)
        };
        Ok(ForgeRecord { id, image, image_sha256, plan })
    })?;

    let mut report = RunReport::new("forge");
    for r in &records {
        report.bump("accepted");
        report.add("instances_placed", r.plan.instances.len());
        report.add("instances_requested", r.plan.requested_instances);
        for d in &r.plan.dropped {
            let key = format!("dropped_{}", serde_json::to_value(d.reason)?.as_str().unwrap_or("other"));
            report.bump(&key);
        }
    }
    ctx.finish(out, &records, report)
}
