use anyhow::{Context, Result};
use posterkit_core::pairs::{build_preference_pair, parse_verdict, set_extremes, CandidateSet, PreferencePair, Verdict};
use serde::{Deserialize, Serialize};

use super::{failure_reason, fetch, resolve, Ctx};
use crate::manifest::check_ids;
use crate::report::RunReport;
use crate::vlm::{Attachment, TemplateId};

pub type PairsInput = CandidateSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsRecord {
    pub prompt_id: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PreferencePair>,
}

/// Verdict for the winner, or why there is none.
fn verdict_for(ctx: &Ctx, set: &CandidateSet, winner: usize) -> Result<std::result::Result<Verdict, String>> {
    let params = ctx.config.pairs.clone().unwrap_or_default();
    let sidecar = format!("{}.verdict.json", set.prompt_id);
    let image = resolve(&ctx.input_dir(), &set.candidates[winner].image);
    let fetched = fetch(ctx.gateway, params.responses.as_deref(), &sidecar, |gw| {
        let Some(prompt) = set.prompt.as_deref() else {
            return Ok(Err(crate::vlm::VlmFailure::ReplayMiss { key: "(set has no prompt)".into() }));
        };
        let att = Attachment::from_path(&image).with_context(|| format!("reading {}", image.display()))?;
        gw.request(TemplateId::AlignmentEval, Some(prompt), &[att])
    })?;
    Ok(match fetched {
        Ok(f) => parse_verdict(&f.raw).map_err(|e| format!("unparseable verdict in {}: {e}", f.reference(&sidecar))),
        Err(f) => Err(format!("{}: {f}", failure_reason(&f))),
    })
}

pub(super) fn run(ctx: &Ctx) -> Result<RunReport> {
    let min_gap = ctx.config.pairs.clone().unwrap_or_default().min_gap;
    let sets: Vec<PairsInput> = ctx.read_input()?;
    check_ids(sets.iter().map(|s| s.prompt_id.as_str()))?;
    let out = ctx.open_output()?;

    let mut records = ctx.map(&sets, |set| {
        // Sets that cannot produce a pair are settled without asking for a verdict.
        let (verdict, why_missing) = match set_extremes(set) {
            Err(_) => (None, None),
            Ok((winner, _)) => match verdict_for(ctx, set, winner)? {
                Ok(v) => (Some(v), None),
                Err(why) => (None, Some(why)),
            },
        };
        Ok(match build_preference_pair(set, verdict, min_gap) {
            Ok(pair) => PairsRecord {
                prompt_id: set.prompt_id.clone(),
                status: "accepted".into(),
                reason: None,
                detail: None,
                pair: Some(pair),
            },
            Err(rej) => PairsRecord {
                prompt_id: set.prompt_id.clone(),
                status: "rejected".into(),
                reason: Some(rej.reason.as_str().into()),
                detail: Some(why_missing.unwrap_or(rej.detail)),
                pair: None,
            },
        })
    })?;

    let mut report = RunReport::new("pairs");
    report.records_in = sets.len();
    for r in &records {
        report.bump(r.reason.as_deref().unwrap_or("accepted"));
    }
    records.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id));
    ctx.finish(out, &records, report)
}
