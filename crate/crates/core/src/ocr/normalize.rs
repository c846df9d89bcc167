/// Characters removed during normalization.
const STRIPPED: &[char] = &[
    '.', ',', ';', ':', '!', '?', '\'', '"', '-', '(', ')', '[', ']', '{', '}', '…', '`',
];

pub fn is_stripped_punctuation(c: char) -> bool {
    STRIPPED.contains(&c)
}

/// Lowercases, strips punctuation, then collapses whitespace runs to a single
/// space and trims.
///
/// Punctuation goes first, so `"A-B"` becomes `"ab"` rather than `"a b"`.
pub fn normalize_text(raw: &str) -> String {
    let stripped: String = raw
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| !is_stripped_punctuation(*c))
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}
