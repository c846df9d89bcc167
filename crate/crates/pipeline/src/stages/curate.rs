use std::fs;

use anyhow::{Context, Result};
use image::ImageFormat;
use posterkit_core::curation::{
    binary_gate, content_hash, dhash, exact_dedup, hps_filter, near_dedup, parse_text_regions, BinaryLogits,
    PosterRecord, RegionWeight, RejectReason, Rejection, Status, TextRegionMask, WeightMap,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{failure_reason, fetch, resolve, Ctx};
use crate::manifest::check_ids;
use crate::report::RunReport;
use crate::vlm::{Attachment, TemplateId, VlmFailure};

/// One poster to curate. Scores come from upstream scorer runs; fields not
/// listed here are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurateInput {
    pub id: String,
    /// Image path, relative to the input manifest's directory.
    pub image: String,
    #[serde(default)]
    pub binary_logits: Option<BinaryLogits>,
    #[serde(default)]
    pub hps_score: Option<f64>,
    #[serde(default)]
    pub caption: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurateRecord {
    pub id: String,
    pub image: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub md5: Option<String>,
    pub phash: Option<String>,
    pub binary_score: Option<f64>,
    pub hps_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caption: Option<String>,
    #[serde(default)]
    pub masks: Vec<TextRegionMask>,
    /// Weight map PNG relative to the output directory; accepted posters only.
    #[serde(default)]
    pub weight_map: Option<String>,
}

const WEIGHT_DIR: &str = "weight_maps";

struct Loaded {
    record: PosterRecord,
    size: Option<(u32, u32)>,
    io_error: Option<String>,
}

pub(super) fn run(ctx: &Ctx) -> Result<RunReport> {
    let params = ctx.config.curate.clone().unwrap_or_default();
    let thresholds = params.thresholds;
    let inputs: Vec<CurateInput> = ctx.read_input()?;
    check_ids(inputs.iter().map(|r| r.id.as_str()))?;
    let base = ctx.input_dir();

    // Hashing and decoding; unreadable images are rejected here and never
    // reach the dedup stages.
    let loaded = ctx.map(&inputs, |input| {
        let mut record = PosterRecord::new(&input.id);
        record.caption = input.caption.clone();
        let path = resolve(&base, &input.image);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => return Ok(Loaded { record, size: None, io_error: Some(format!("{}: {e}", path.display())) }),
        };
        record.content_hash = Some(content_hash(&bytes));
        match image::load_from_memory(&bytes) {
            Ok(img) => {
                record.phash = Some(dhash(&img));
                Ok(Loaded { size: Some((img.width(), img.height())), record, io_error: None })
            }
            Err(e) => Ok(Loaded { record, size: None, io_error: Some(format!("{}: {e}", path.display())) }),
        }
    })?;

    let mut records = Vec::with_capacity(loaded.len());
    let mut sizes = Vec::with_capacity(loaded.len());
    for l in loaded {
        let mut r = l.record;
        if let Some(e) = l.io_error {
            r.reject(Rejection::new(RejectReason::Io, e));
        }
        records.push(r);
        sizes.push(l.size);
    }

    exact_dedup(&mut records);
    for (r, input) in records.iter_mut().zip(&inputs) {
        if r.is_pending() {
            match binary_gate(input.binary_logits, thresholds.binary_threshold) {
                Ok(score) => r.binary_score = Some(score),
                Err(rej) => r.reject(rej),
            }
        }
    }
    near_dedup(&mut records, thresholds.hamming_threshold);
    for (r, input) in records.iter_mut().zip(&inputs) {
        r.hps_score = input.hps_score;
        if r.is_pending() {
            if let Err(rej) = hps_filter(input.hps_score, thresholds.hps_threshold) {
                r.reject(rej);
            }
        }
    }

    let out = ctx.open_output()?;
    fs::create_dir(out.path().join(WEIGHT_DIR))?;
    let work: Vec<usize> = (0..records.len()).collect();
    let finished = ctx.map(&work, |&i| {
        let mut r = records[i].clone();
        let input = &inputs[i];
        let mut weight_map = None;
        if r.is_pending() {
            match masks_for(ctx, &params, input, thresholds.major_fraction_threshold)? {
                Ok(masks) => {
                    r.masks = masks;
                    let (w, h) = sizes[i].expect("pending records were decoded");
                    let map = WeightMap::rasterize(&r.masks, w, h);
                    let name = format!("{WEIGHT_DIR}/{}.png", r.id);
                    map.to_gray_image()
                        .save_with_format(out.path().join(&name), ImageFormat::Png)
                        .with_context(|| format!("writing {name}"))?;
                    weight_map = Some(name);
                    r.status = Status::Accepted;
                }
                Err(rej) => r.reject(rej),
            }
        }
        Ok(to_output(r, input, weight_map))
    })?;

    let mut report = RunReport::new("curate");
    report.records_in = inputs.len();
    for rec in &finished {
        match rec.reason {
            Some(reason) => report.bump(reason.as_str()),
            None => report.bump("accepted"),
        }
    }
    let mapping: serde_json::Map<String, serde_json::Value> = RegionWeight::ALL
        .iter()
        .map(|w| (format!("{}", w.weight()), json!(w.gray_level())))
        .collect();
    let mapping = json!({"channels": 1, "weight_to_gray_level": mapping});
    fs::write(out.path().join(WEIGHT_DIR).join("mapping.json"), serde_json::to_string_pretty(&mapping)? + "\n")?;

    let mut finished = finished;
    finished.sort_by(|a, b| a.id.cmp(&b.id));
    ctx.finish(out, &finished, report)
}

fn masks_for(
    ctx: &Ctx,
    params: &crate::config::CurateParams,
    input: &CurateInput,
    major_threshold: f64,
) -> Result<std::result::Result<Vec<TextRegionMask>, Rejection>> {
    if !params.masks {
        return Ok(Ok(Vec::new()));
    }
    let sidecar = format!("{}.text_regions.json", input.id);
    let image_path = resolve(&ctx.input_dir(), &input.image);
    let fetched = fetch(ctx.gateway, params.responses.as_deref(), &sidecar, |gw| {
        let att = Attachment::from_path(&image_path).with_context(|| format!("reading {}", image_path.display()))?;
        gw.request(TemplateId::MaskGeneration, None, &[att])
    })?;
    let fetched = match fetched {
        Ok(f) => f,
        // Only captured files were configured and this one is absent.
        Err(VlmFailure::ReplayMiss { .. }) if params.responses.is_some() && ctx.config.vlm.cache_dir.is_none() => {
            return Ok(Err(Rejection::new(RejectReason::MaskMissing, format!("no {sidecar}"))));
        }
        Err(f) => {
            let reason = match failure_reason(&f) {
                "replay_miss" => RejectReason::ReplayMiss,
                _ => RejectReason::ClientError,
            };
            return Ok(Err(Rejection::new(reason, f.to_string())));
        }
    };
    match parse_text_regions(&fetched.raw) {
        Ok(boxes) => Ok(Ok(boxes.into_iter().map(|b| TextRegionMask::classify(b, major_threshold)).collect())),
        Err(e) => Ok(Err(Rejection::new(RejectReason::MaskParse, format!("{} ({e})", fetched.reference(&sidecar))))),
    }
}

fn to_output(r: PosterRecord, input: &CurateInput, weight_map: Option<String>) -> CurateRecord {
    let (status, reason, detail) = match r.status {
        Status::Accepted => ("accepted".to_string(), None, None),
        Status::Rejected(rej) => ("rejected".to_string(), Some(rej.reason), Some(rej.detail)),
        Status::Pending => unreachable!("every record is decided"),
    };
    CurateRecord {
        id: r.id,
        image: input.image.clone(),
        status,
        reason,
        detail,
        md5: r.content_hash.map(|h| h.to_hex()),
        phash: r.phash.map(|p| format!("{:016x}", p.0)),
        binary_score: r.binary_score,
        hps_score: r.hps_score,
        caption: r.caption,
        masks: r.masks,
        weight_map,
    }
}
