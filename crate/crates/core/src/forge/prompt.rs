//! Prompt clauses describing placed text, and the parser that inverts them.
//!
//! Clause shape:
//! `The text "<content>" is placed at the <position>, <orientation>, in <color> color[, using a <class> font].`
//! Inside the quotes, `"` and `\` are backslash-escaped. Several clauses are
//! numbered `1. ... 2. ...` and joined with single spaces.

use rand::Rng;
use thiserror::Error;

use super::{ColorCategory, FontClass, GenerationConfig, GridCell, Orientation, PlacedInstance};

pub const NO_TEXT_PROMPT: &str = "The image contains no rendered text.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptClause {
    pub content: String,
    pub cell: GridCell,
    pub orientation: Orientation,
    pub color: ColorCategory,
    pub font_class: Option<FontClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("prompt parse error at byte {offset}: {message}")]
pub struct PromptParseError {
    pub offset: usize,
    pub message: String,
}

fn orientation_phrase(o: Orientation) -> &'static str {
    match o {
        Orientation::Horizontal => "written horizontally",
        Orientation::VerticalRotated => "rotated vertically",
        Orientation::VerticalStacked => "stacked vertically",
    }
}

fn escape(content: &str) -> String {
    let mut out = String::with_capacity(content.len());
    for c in content.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

impl PromptClause {
    pub fn render(&self) -> String {
        let mut s = format!(
            "The text \"{}\" is placed at the {}, {}, in {} color",
            escape(&self.content),
            self.cell.position_name(),
            orientation_phrase(self.orientation),
            self.color.name()
        );
        if let Some(class) = self.font_class {
            s.push_str(", using a ");
            s.push_str(class.as_str());
            s.push_str(" font");
        }
        s.push('.');
        s
    }
}

/// One clause per instance; the font class is mentioned with probability
/// `font_mention_probability`. No instances gives the fixed no-text sentence.
pub fn synthesize_prompt(instances: &[PlacedInstance], config: &GenerationConfig, rng: &mut impl Rng) -> String {
    let clauses: Vec<String> = instances
        .iter()
        .map(|inst| {
            let mention = rng.random_bool(config.font_mention_probability);
            PromptClause {
                content: inst.spec.content.clone(),
                cell: inst.spec.grid_cell,
                orientation: inst.spec.orientation,
                color: inst.spec.color_category,
                font_class: mention.then_some(inst.spec.font_class),
            }
            .render()
        })
        .collect();
    match clauses.len() {
        0 => NO_TEXT_PROMPT.to_string(),
        1 => clauses.into_iter().next().unwrap(),
        _ => clauses
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}. {c}", i + 1))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, PromptParseError> {
        Err(PromptParseError { offset: self.pos, message: message.into() })
    }

    fn expect(&mut self, lit: &str) -> Result<(), PromptParseError> {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            self.fail(format!("expected {lit:?}"))
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        let ok = self.rest().starts_with(lit);
        if ok {
            self.pos += lit.len();
        }
        ok
    }

    /// Consumes the longest candidate that prefixes the remaining text.
    fn one_of<T: Copy>(&mut self, options: &[(&str, T)], what: &str) -> Result<T, PromptParseError> {
        let best = options
            .iter()
            .filter(|(name, _)| self.rest().starts_with(name))
            .max_by_key(|(name, _)| name.len());
        match best {
            Some((name, v)) => {
                self.pos += name.len();
                Ok(*v)
            }
            None => self.fail(format!("expected {what}")),
        }
    }

    fn quoted(&mut self) -> Result<String, PromptParseError> {
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => out.push(e),
                    _ => {
                        self.pos += i;
                        return self.fail("bad escape");
                    }
                },
                c => out.push(c),
            }
        }
        self.fail("unterminated quote")
    }

    fn clause(&mut self) -> Result<PromptClause, PromptParseError> {
        self.expect("The text \"")?;
        let content = self.quoted()?;
        if content.is_empty() {
            return self.fail("empty content");
        }
        self.expect(" is placed at the ")?;
        let positions: Vec<(&str, GridCell)> = GridCell::ALL.iter().map(|c| (c.position_name(), *c)).collect();
        let cell = self.one_of(&positions, "position")?;
        self.expect(", ")?;
        let orientations: Vec<(&str, Orientation)> =
            Orientation::ALL.iter().map(|o| (orientation_phrase(*o), *o)).collect();
        let orientation = self.one_of(&orientations, "orientation")?;
        self.expect(", in ")?;
        let colors: Vec<(&str, ColorCategory)> = ColorCategory::ALL.iter().map(|c| (c.name(), *c)).collect();
        let color = self.one_of(&colors, "color")?;
        self.expect(" color")?;
        let font_class = if self.eat(", using a ") {
            let class = self.one_of(
                &[("classic", FontClass::Classic), ("stylized", FontClass::Stylized)],
                "font class",
            )?;
            self.expect(" font")?;
            Some(class)
        } else {
            None
        };
        self.expect(".")?;
        Ok(PromptClause { content, cell, orientation, color, font_class })
    }
}

/// Parses a prompt produced by [`synthesize_prompt`].
pub fn parse_prompt(text: &str) -> Result<Vec<PromptClause>, PromptParseError> {
    if text == NO_TEXT_PROMPT {
        return Ok(Vec::new());
    }
    let mut cur = Cursor { text, pos: 0 };
    let mut clauses = Vec::new();
    if !cur.rest().starts_with("1. ") {
        clauses.push(cur.clause()?);
    } else {
        let mut n = 1;
        loop {
            cur.expect(&format!("{n}. "))?;
            clauses.push(cur.clause()?);
            if cur.rest().is_empty() {
                break;
            }
            cur.expect(" ")?;
            n += 1;
        }
        if clauses.len() < 2 {
            return cur.fail("numbered prompt with a single clause");
        }
    }
    if !cur.rest().is_empty() {
        return cur.fail("trailing text");
    }
    Ok(clauses)
}
