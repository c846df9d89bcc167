//! Text content for rendered instances: template grammar phrases and noisy
//! alphanumeric strings.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ForgeError, GenerationConfig};

pub const MAX_CONTENT_CHARS: usize = 48;
const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Slot(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Template(Vec<Token>);

impl Template {
    /// Uppercase words made of `A-Z` and `_` are slots; everything else is
    /// copied through.
    fn parse(line: &str) -> Self {
        let tokens = line
            .split_whitespace()
            .map(|w| {
                if w.len() > 1 && w.bytes().all(|b| b.is_ascii_uppercase() || b == b'_') {
                    Token::Slot(w.to_string())
                } else {
                    Token::Literal(w.to_string())
                }
            })
            .collect();
        Self(tokens)
    }
}

/// Phrase templates plus the word lists their slots draw from.
#[derive(Debug, Clone)]
pub struct Grammar {
    templates: Vec<Template>,
    vocabulary: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentKind {
    Phrase,
    Alphanumeric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextContent {
    pub text: String,
    pub kind: ContentKind,
}

const BUILTIN_TEMPLATES: &[&str] = &[
    "NOUN",
    "ADJ",
    "EVENT",
    "ADJ NOUN",
    "ADJ EVENT",
    "NOUN EVENT",
    "The ADJ NOUN",
    "VERB the NOUN",
    "CITY EVENT YEAR",
    "EVENT of NOUN",
    "ADJ NOUN EVENT",
    "NOUN and NOUN",
    "Live in CITY",
    "YEAR ADJ EVENT",
    "Welcome to CITY",
    "VERB ADJ",
];

const BUILTIN_WORDS: &[(&str, &[&str])] = &[
    (
        "ADJ",
        &[
            "Golden", "Wild", "Silent", "Bright", "Grand", "Urban", "Modern", "Classic", "Electric",
            "Midnight", "Summer", "Winter", "Spring", "Autumn", "Cosmic", "Secret", "Lucky", "Royal",
            "Vintage", "Neon", "Fresh", "Epic", "Gentle", "Bold", "Hidden", "Crystal", "Velvet",
            "Sunny", "Rapid", "Ancient", "Little", "Infinite", "Quiet", "Radiant", "Wandering",
        ],
    ),
    (
        "NOUN",
        &[
            "Festival", "Garden", "Ocean", "River", "Forest", "Coffee", "Dream", "Harbor", "Market",
            "Journey", "Light", "Sound", "Story", "Bakery", "Library", "Mountain", "Voyage", "Kitchen",
            "Studio", "Theater", "Planet", "Island", "Bridge", "Lantern", "Season", "Museum", "Valley",
            "Horizon", "Rhythm", "Canvas", "Pixel", "Orchard", "Meadow", "Tea", "Books", "Jazz",
        ],
    ),
    (
        "EVENT",
        &[
            "Festival", "Concert", "Expo", "Fair", "Sale", "Gala", "Parade", "Marathon", "Workshop",
            "Carnival", "Exhibition", "Tour", "Summit", "Night", "Party", "Show", "Premiere",
        ],
    ),
    (
        "VERB",
        &[
            "Discover", "Explore", "Celebrate", "Join", "Taste", "Meet", "Imagine", "Build", "Share",
            "Dance", "Create", "Visit", "Enjoy", "Listen", "Save",
        ],
    ),
    (
        "CITY",
        &[
            "Paris", "Tokyo", "Berlin", "Lisbon", "Seoul", "Cairo", "Oslo", "Lima", "Dublin", "Prague",
            "Vienna", "Austin", "Madrid", "Sydney", "Nairobi", "Boston",
        ],
    ),
    ("YEAR", &["2019", "2020", "2021", "2022", "2023", "2024", "2025", "2026", "2027", "2030"]),
];

impl Grammar {
    /// Builds a grammar and checks that every slot has at least one word.
    pub fn new<T, S>(templates: T, vocabulary: BTreeMap<String, Vec<String>>) -> Result<Self, ForgeError>
    where
        T: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let templates: Vec<Template> = templates
            .into_iter()
            .map(|t| Template::parse(t.as_ref()))
            .filter(|t| !t.0.is_empty())
            .collect();
        if templates.is_empty() {
            return Err(ForgeError::Config("grammar has no templates".into()));
        }
        for t in &templates {
            for tok in &t.0 {
                if let Token::Slot(name) = tok {
                    if vocabulary.get(name).is_none_or(|v| v.is_empty()) {
                        return Err(ForgeError::EmptyVocabulary(name.clone()));
                    }
                }
            }
        }
        Ok(Self { templates, vocabulary })
    }

    pub fn builtin() -> Self {
        let vocabulary = BUILTIN_WORDS
            .iter()
            .map(|(k, words)| (k.to_string(), words.iter().map(|w| w.to_string()).collect()))
            .collect();
        Self::new(BUILTIN_TEMPLATES.iter().copied(), vocabulary).expect("builtin grammar is complete")
    }

    /// Loads `<CATEGORY>.txt` word lists from a directory. An optional
    /// `templates.txt` replaces the builtin templates. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn load_dir(dir: &Path) -> Result<Self, ForgeError> {
        let mut vocabulary = BTreeMap::new();
        let mut templates: Option<Vec<String>> = None;
        let mut entries: Vec<_> = fs::read_dir(dir)
            .map_err(|e| ForgeError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        entries.sort();
        for path in entries {
            let text = fs::read_to_string(&path).map_err(|e| ForgeError::io(&path, e))?;
            let lines: Vec<String> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect();
            if let Some(bad) = lines.iter().find(|l| l.chars().any(char::is_control)) {
                return Err(ForgeError::Config(format!(
                    "{}: entry {bad:?} contains control characters",
                    path.display()
                )));
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            if stem == "templates" {
                templates = Some(lines);
            } else {
                vocabulary.insert(stem.to_ascii_uppercase(), lines);
            }
        }
        match templates {
            Some(t) => Self::new(t, vocabulary),
            None => Self::new(BUILTIN_TEMPLATES.iter().copied(), vocabulary),
        }
    }

    fn expand(&self, rng: &mut impl Rng) -> String {
        let template = self.templates.choose(rng).expect("non-empty templates");
        let words: Vec<&str> = template
            .0
            .iter()
            .map(|tok| match tok {
                Token::Literal(w) => w.as_str(),
                Token::Slot(name) => self.vocabulary[name].choose(rng).expect("checked non-empty"),
            })
            .collect();
        words.join(" ")
    }
}

fn vary_casing(text: &str, rng: &mut impl Rng) -> String {
    let roll: f64 = rng.random();
    if roll < 0.45 {
        text.to_string()
    } else if roll < 0.70 {
        text.to_uppercase()
    } else if roll < 0.85 {
        text.to_lowercase()
    } else {
        text.split(' ')
            .map(|w| {
                let mut cs = w.chars();
                match cs.next() {
                    Some(first) => first.to_uppercase().chain(cs.flat_map(char::to_lowercase)).collect(),
                    None => String::new(),
                }
            })
            .collect::<Vec<String>>()
            .join(" ")
    }
}

fn vary_punctuation(mut text: String, rng: &mut impl Rng) -> String {
    const SUFFIXES: &[(&str, f64)] = &[("!", 0.15), (".", 0.08), ("?", 0.05), ("...", 0.04), (":", 0.03)];
    let roll: f64 = rng.random();
    let mut acc = 0.0;
    for (suffix, p) in SUFFIXES {
        acc += p;
        if roll < acc {
            text.push_str(suffix);
            break;
        }
    }
    text
}

fn truncate_chars(text: &str, max: usize) -> String {
    let cut: String = text.chars().take(max).collect();
    cut.trim_end().to_string()
}

/// Draws one content string: a random alphanumeric string with probability
/// `alphanumeric_fraction`, a grammar phrase otherwise.
pub fn generate_text_content(rng: &mut impl Rng, grammar: &Grammar, config: &GenerationConfig) -> TextContent {
    if rng.random_bool(config.alphanumeric_fraction) {
        let len = rng.random_range(3..=12);
        let text = (0..len).map(|_| *ALNUM.choose(rng).unwrap() as char).collect();
        return TextContent { text, kind: ContentKind::Alphanumeric };
    }
    let mut text = grammar.expand(rng);
    if config.vary_casing {
        text = vary_casing(&text, rng);
    }
    if config.vary_punctuation {
        text = vary_punctuation(text, rng);
    }
    if text.chars().count() > MAX_CONTENT_CHARS {
        text = truncate_chars(&text, MAX_CONTENT_CHARS);
    }
    TextContent { text, kind: ContentKind::Phrase }
}
