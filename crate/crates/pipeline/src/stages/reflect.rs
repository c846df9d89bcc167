use anyhow::{Context, Result};
use posterkit_core::pairs::{build_reflection_pairs, parse_best_of_six, parse_feedback, ReflectionSet};
use serde::{Deserialize, Serialize};

use super::{failure_reason, fetch, resolve, Ctx};
use crate::manifest::check_ids;
use crate::report::RunReport;
use crate::vlm::{Attachment, TemplateId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectInput {
    pub prompt_id: String,
    pub prompt: String,
    /// Six image paths, relative to the input manifest's directory.
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectRecord {
    pub prompt_id: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<ReflectionSet>,
}

fn attach(ctx: &Ctx, path: &str) -> Result<Attachment> {
    let p = resolve(&ctx.input_dir(), path);
    Attachment::from_path(&p).with_context(|| format!("reading {}", p.display()))
}

fn rejected(input: &ReflectInput, reason: &str, detail: String) -> ReflectRecord {
    ReflectRecord {
        prompt_id: input.prompt_id.clone(),
        status: "rejected".into(),
        reason: Some(reason.into()),
        detail: Some(detail),
        set: None,
    }
}

fn process(ctx: &Ctx, input: &ReflectInput) -> Result<ReflectRecord> {
    let dir = ctx.config.reflect.as_ref().and_then(|r| r.responses.clone());
    let dir = dir.as_deref();
    if input.candidates.len() != posterkit_core::pairs::REFLECTION_SET_SIZE {
        return Ok(rejected(input, "invalid_set", format!("expected 6 candidates, got {}", input.candidates.len())));
    }

    let sidecar = format!("{}.best.json", input.prompt_id);
    let fetched = fetch(ctx.gateway, dir, &sidecar, |gw| {
        let atts = input.candidates.iter().map(|c| attach(ctx, c)).collect::<Result<Vec<_>>>()?;
        gw.request(TemplateId::BestOfSix, Some(&input.prompt), &atts)
    })?;
    let fetched = match fetched {
        Ok(f) => f,
        Err(f) => return Ok(rejected(input, failure_reason(&f), f.to_string())),
    };
    let best = match parse_best_of_six(&fetched.raw) {
        Ok(b) => b,
        Err(e) => return Ok(rejected(input, "parse_error", format!("{} ({e})", fetched.reference(&sidecar)))),
    };

    // Feedback requests run inside this worker; sets are the unit of parallelism.
    let mut hard_error = None;
    let set = build_reflection_pairs(&input.prompt_id, &input.candidates, best, |i| {
        let name = format!("{}.feedback.{i}.json", input.prompt_id);
        let best = best.expect("feedback is only requested with a best candidate");
        let fetched = fetch(ctx.gateway, dir, &name, |gw| {
            let atts = vec![attach(ctx, &input.candidates[i])?, attach(ctx, &input.candidates[best])?];
            gw.request(TemplateId::Feedback, None, &atts)
        });
        match fetched {
            Err(e) => {
                let msg = format!("{e:#}");
                hard_error.get_or_insert(e);
                Err(msg)
            }
            Ok(Err(f)) => Err(format!("{}: {f}", failure_reason(&f))),
            Ok(Ok(f)) => parse_feedback(&f.raw).map_err(|e| format!("parse_error: {} ({e})", f.reference(&name))),
        }
    });
    if let Some(e) = hard_error {
        return Err(e);
    }
    Ok(match set {
        Ok(set) => ReflectRecord {
            prompt_id: input.prompt_id.clone(),
            status: if set.discarded { "discarded".into() } else { "accepted".into() },
            reason: None,
            detail: None,
            set: Some(set),
        },
        Err(rej) => rejected(input, rej.reason.as_str(), rej.detail),
    })
}

pub(super) fn run(ctx: &Ctx) -> Result<RunReport> {
    let inputs: Vec<ReflectInput> = ctx.read_input()?;
    check_ids(inputs.iter().map(|s| s.prompt_id.as_str()))?;
    let out = ctx.open_output()?;
    let mut records = ctx.map(&inputs, |input| process(ctx, input))?;

    let mut report = RunReport::new("reflect");
    report.records_in = inputs.len();
    for r in &records {
        match (&r.reason, &r.set) {
            (Some(reason), _) => report.bump(reason),
            (None, Some(set)) => {
                report.bump(&r.status);
                report.add("reflection_pairs", set.pairs.len());
                report.add("feedback_dropped", set.dropped.len());
            }
            (None, None) => unreachable!("accepted records carry a set"),
        }
    }
    records.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id));
    ctx.finish(out, &records, report)
}
