use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use anyhow::{Context, Result};
use posterkit_core::loss::tensor_io::read_tensor;
use posterkit_core::loss::{dpo_loss, flow_loss, target_velocity, weighted_flow_loss, DpoInputs, Tensor, WeightingMode};
use serde::{Deserialize, Serialize};

use super::{resolve, Ctx};
use crate::manifest::check_ids;
use crate::report::RunReport;

/// Regression target: a stored tensor, or `x0`, `eps` and `t` from which the
/// velocity target is derived under the configured schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Target {
    Stored { target: String },
    Derived { x0: String, eps: String, t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossCase {
    Flow {
        id: String,
        v_pred: String,
        #[serde(flatten)]
        target: Target,
    },
    WeightedFlow {
        id: String,
        v_pred: String,
        #[serde(flatten)]
        target: Target,
        weight: String,
        #[serde(default)]
        mode: WeightingMode,
    },
    Dpo {
        id: String,
        #[serde(flatten)]
        inputs: DpoInputs,
    },
}

impl LossCase {
    pub fn id(&self) -> &str {
        match self {
            LossCase::Flow { id, .. } | LossCase::WeightedFlow { id, .. } | LossCase::Dpo { id, .. } => id,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            LossCase::Flow { .. } => "flow",
            LossCase::WeightedFlow { .. } => "weighted_flow",
            LossCase::Dpo { .. } => "dpo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossResult {
    pub id: String,
    pub kind: String,
    pub loss: f64,
}

fn load(base: &Path, p: &str) -> Result<Tensor> {
    let path = resolve(base, p);
    let f = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    read_tensor(BufReader::new(f)).with_context(|| format!("reading tensor {}", path.display()))
}

fn target(ctx: &Ctx, base: &Path, t: &Target) -> Result<Tensor> {
    let schedule = ctx.config.losscheck.clone().unwrap_or_default().schedule;
    match t {
        Target::Stored { target } => load(base, target),
        Target::Derived { x0, eps, t } => Ok(target_velocity(&load(base, x0)?, &load(base, eps)?, *t, &schedule)?),
    }
}

fn evaluate(ctx: &Ctx, base: &Path, case: &LossCase) -> Result<f64> {
    Ok(match case {
        LossCase::Flow { v_pred, target: t, .. } => flow_loss(&load(base, v_pred)?, &target(ctx, base, t)?)?,
        LossCase::WeightedFlow { v_pred, target: t, weight, mode, .. } => {
            weighted_flow_loss(&load(base, v_pred)?, &target(ctx, base, t)?, &load(base, weight)?, *mode)?
        }
        LossCase::Dpo { inputs, .. } => dpo_loss(inputs)?,
    })
}

pub(super) fn run(ctx: &Ctx) -> Result<RunReport> {
    let cases: Vec<LossCase> = ctx.read_input()?;
    check_ids(cases.iter().map(LossCase::id))?;
    let base = ctx.input_dir();
    // Every case must evaluate; a bad tensor is a hard error, not a rejection.
    let mut results = ctx.map(&cases, |case| {
        let loss = evaluate(ctx, &base, case).with_context(|| format!("case {}", case.id()))?;
        Ok(LossResult { id: case.id().to_string(), kind: case.kind().to_string(), loss })
    })?;
    results.sort_by(|a, b| a.id.cmp(&b.id));
    let out = ctx.open_output()?;
    let mut report = RunReport::new("losscheck");
    report.records_in = cases.len();
    for r in &results {
        report.bump(&r.kind);
    }
    ctx.finish(out, &results, report)
}
