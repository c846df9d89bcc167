use std::fmt;

use serde::{Deserialize, Serialize};

const PLACEHOLDER: &str = "{original_prompt}";

/// Prompt templates shipped with the binary. The text lives in
/// `templates/<id>.txt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    BinaryScorer,
    Caption,
    MaskGeneration,
    AlignmentEval,
    BestOfSix,
    Feedback,
    OcrEval,
    PreferenceEval,
}

impl TemplateId {
    pub const ALL: [TemplateId; 8] = [
        TemplateId::BinaryScorer,
        TemplateId::Caption,
        TemplateId::MaskGeneration,
        TemplateId::AlignmentEval,
        TemplateId::BestOfSix,
        TemplateId::Feedback,
        TemplateId::OcrEval,
        TemplateId::PreferenceEval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::BinaryScorer => "binary_scorer",
            TemplateId::Caption => "caption",
            TemplateId::MaskGeneration => "mask_generation",
            TemplateId::AlignmentEval => "alignment_eval",
            TemplateId::BestOfSix => "best_of_six",
            TemplateId::Feedback => "feedback",
            TemplateId::OcrEval => "ocr_eval",
            TemplateId::PreferenceEval => "preference_eval",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            TemplateId::BinaryScorer => include_str!("../../templates/binary_scorer.txt"),
            TemplateId::Caption => include_str!("../../templates/caption.txt"),
            TemplateId::MaskGeneration => include_str!("../../templates/mask_generation.txt"),
            TemplateId::AlignmentEval => include_str!("../../templates/alignment_eval.txt"),
            TemplateId::BestOfSix => include_str!("../../templates/best_of_six.txt"),
            TemplateId::Feedback => include_str!("../../templates/feedback.txt"),
            TemplateId::OcrEval => include_str!("../../templates/ocr_eval.txt"),
            TemplateId::PreferenceEval => include_str!("../../templates/preference_eval.txt"),
        }
    }

    pub fn takes_prompt(self) -> bool {
        self.text().contains(PLACEHOLDER)
    }

    /// Fills in the original prompt. Templates without a placeholder ignore
    /// it; the substitution is a single pass, so prompt text is never
    /// re-expanded.
    pub fn render(self, original_prompt: Option<&str>) -> Result<String, String> {
        let text = self.text();
        if !self.takes_prompt() {
            return Ok(text.to_string());
        }
        let prompt = original_prompt.ok_or_else(|| format!("template {self} needs the original prompt"))?;
        Ok(text.replace(PLACEHOLDER, prompt))
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
