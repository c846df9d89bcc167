use anyhow::{bail, Context, Result};
use posterkit_core::ocr::{aggregate_corpus, evaluate_pair, OcrMetrics, OcrReport, Percent};
use posterkit_core::response::{parse_object, required, ResponseError};
use serde::{Deserialize, Serialize};

use super::{failure_reason, fetch, resolve, Ctx};
use crate::manifest::check_ids;
use crate::report::RunReport;
use crate::vlm::{Attachment, TemplateId};

/// Either both texts, or a design prompt plus the image for the evaluator
/// model to read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcrInput {
    pub id: String,
    #[serde(default)]
    pub gt_text: Option<String>,
    #[serde(default)]
    pub ocr_text: Option<String>,
    #[serde(default)]
    pub prompt: Option<String>,
    #[serde(default)]
    pub image: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub samples: usize,
    pub evaluated: usize,
    pub rejected: usize,
    pub accuracy: Option<Percent>,
    pub precision: Option<Percent>,
    pub recall: Option<Percent>,
    pub f_score: Option<Percent>,
}

/// One output line: a per-sample report, a rejected sample, or the corpus
/// summary (always last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OcrLine {
    Sample {
        id: String,
        #[serde(flatten)]
        report: OcrReport,
    },
    Rejected {
        id: String,
        status: String,
        reason: String,
        detail: String,
    },
    Summary {
        corpus: CorpusSummary,
    },
}

/// Reads `GT_text` and `OCR_text` from an evaluator response. The counts
/// and percentages in the response are ignored and recomputed.
fn parse_texts(raw: &str) -> Result<(String, String), ResponseError> {
    let map = parse_object(raw)?;
    let text = |key: &str| -> Result<String, ResponseError> {
        let v = required(&map, key)?;
        v.as_str().map(str::to_string).ok_or_else(|| ResponseError::InvalidValue {
            key: key.to_string(),
            fragment: v.to_string(),
            reason: "expected a string".into(),
        })
    };
    Ok((text("GT_text")?, text("OCR_text")?))
}

fn process(ctx: &Ctx, input: &OcrInput) -> Result<std::result::Result<(OcrReport, OcrMetrics), (String, String)>> {
    if let (Some(gt), Some(ocr)) = (&input.gt_text, &input.ocr_text) {
        return Ok(Ok(evaluate_pair(gt, ocr)));
    }
    let (prompt, image) = (input.prompt.as_deref().unwrap(), input.image.as_deref().unwrap());
    let dir = ctx.config.ocr_eval.as_ref().and_then(|o| o.responses.clone());
    let sidecar = format!("{}.ocr.json", input.id);
    let path = resolve(&ctx.input_dir(), image);
    let fetched = fetch(ctx.gateway, dir.as_deref(), &sidecar, |gw| {
        let att = Attachment::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
        gw.request(TemplateId::OcrEval, Some(prompt), &[att])
    })?;
    let fetched = match fetched {
        Ok(f) => f,
        Err(f) => return Ok(Err((failure_reason(&f).into(), f.to_string()))),
    };
    Ok(match parse_texts(&fetched.raw) {
        Ok((gt, ocr)) => Ok(evaluate_pair(&gt, &ocr)),
        Err(e) => Err(("parse_error".into(), format!("{} ({e})", fetched.reference(&sidecar)))),
    })
}

pub(super) fn run(ctx: &Ctx) -> Result<RunReport> {
    let inputs: Vec<OcrInput> = ctx.read_input()?;
    check_ids(inputs.iter().map(|r| r.id.as_str()))?;
    for r in &inputs {
        let texts = r.gt_text.is_some() && r.ocr_text.is_some();
        let vlm = r.prompt.is_some() && r.image.is_some();
        if !(texts || vlm) {
            bail!("record {} needs gt_text and ocr_text, or prompt and image", r.id);
        }
    }
    let out = ctx.open_output()?;
    let results = ctx.map(&inputs, |input| process(ctx, input))?;

    let mut report = RunReport::new("ocr-eval");
    report.records_in = inputs.len();
    let mut lines: Vec<(String, OcrLine)> = Vec::new();
    let mut metrics = Vec::new();
    for (input, result) in inputs.iter().zip(results) {
        let line = match result {
            Ok((r, m)) => {
                report.bump("accepted");
                metrics.push(m);
                OcrLine::Sample { id: input.id.clone(), report: r }
            }
            Err((reason, detail)) => {
                report.bump(&reason);
                OcrLine::Rejected { id: input.id.clone(), status: "rejected".into(), reason, detail }
            }
        };
        lines.push((input.id.clone(), line));
    }
    lines.sort_by(|a, b| a.0.cmp(&b.0));
    let corpus = aggregate_corpus(&metrics).ok();
    let summary = CorpusSummary {
        samples: inputs.len(),
        evaluated: metrics.len(),
        rejected: inputs.len() - metrics.len(),
        accuracy: corpus.map(|m| Percent(m.accuracy)),
        precision: corpus.map(|m| Percent(m.precision)),
        recall: corpus.map(|m| Percent(m.recall)),
        f_score: corpus.map(|m| Percent(m.f_score)),
    };
    let mut lines: Vec<OcrLine> = lines.into_iter().map(|(_, l)| l).collect();
    lines.push(OcrLine::Summary { corpus: summary });
    ctx.finish(out, &lines, report)
}
