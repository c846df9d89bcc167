use serde::{Deserialize, Serialize};

/// Correct / inserted / deleted / substituted character counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AlignmentCounts {
    pub correct: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

impl AlignmentCounts {
    /// Ground-truth length, `C + D + S`.
    pub fn gt_len(&self) -> usize {
        self.correct + self.deletions + self.substitutions
    }

    /// OCR length, `C + I + S`.
    pub fn ocr_len(&self) -> usize {
        self.correct + self.insertions + self.substitutions
    }

    /// Total compared characters, `C + I + D + S`.
    pub fn total(&self) -> usize {
        self.correct + self.insertions + self.deletions + self.substitutions
    }

    pub fn edit_cost(&self) -> usize {
        self.insertions + self.deletions + self.substitutions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    cost: u32,
    correct: u32,
    substitutions: u32,
}

impl Cell {
    /// Minimum cost first, then most matches, then fewest substitutions.
    fn better_than(&self, other: &Cell) -> bool {
        (self.cost, std::cmp::Reverse(self.correct), self.substitutions)
            < (other.cost, std::cmp::Reverse(other.correct), other.substitutions)
    }

    fn step(self, cost: u32, correct: u32, substitutions: u32) -> Cell {
        Cell {
            cost: self.cost + cost,
            correct: self.correct + correct,
            substitutions: self.substitutions + substitutions,
        }
    }
}

/// Aligns normalized ground truth against normalized OCR output.
///
/// Unit costs for insertion, deletion and substitution; among minimum-cost
/// alignments the one with the most correct characters (and then the fewest
/// substitutions) is reported. Counting is over Unicode scalar values.
pub fn align_chars(gt: &str, ocr: &str) -> AlignmentCounts {
    let gt: Vec<char> = gt.chars().collect();
    let ocr: Vec<char> = ocr.chars().collect();

    let zero = Cell { cost: 0, correct: 0, substitutions: 0 };
    // prev[j]: best alignment of gt[..i-1] with ocr[..j]
    let mut prev: Vec<Cell> = (0..=ocr.len())
        .map(|j| zero.step(j as u32, 0, 0))
        .collect();
    let mut curr = vec![zero; ocr.len() + 1];

    for (i, &g) in gt.iter().enumerate() {
        curr[0] = zero.step(i as u32 + 1, 0, 0);
        for (j, &o) in ocr.iter().enumerate() {
            let diagonal = if g == o {
                prev[j].step(0, 1, 0)
            } else {
                prev[j].step(1, 0, 1)
            };
            let deletion = prev[j + 1].step(1, 0, 0);
            let insertion = curr[j].step(1, 0, 0);
            let mut best = diagonal;
            for candidate in [deletion, insertion] {
                if candidate.better_than(&best) {
                    best = candidate;
                }
            }
            curr[j + 1] = best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }

    let best = prev[ocr.len()];
    let correct = best.correct as usize;
    let substitutions = best.substitutions as usize;
    AlignmentCounts {
        correct,
        substitutions,
        deletions: gt.len() - correct - substitutions,
        insertions: ocr.len() - correct - substitutions,
    }
}
