use alloc::string::String;
use alloc::vec::Vec;

use super::{
    EntitySpan, EntityValue, Lexicon, TokenStream, EXACT_MATCH_CONFIDENCE,
    FOLDED_MATCH_CONFIDENCE, MAX_ENTITY_WORDS,
};

/// Greedy left-to-right longest match of shape and color surface forms.
///
/// At each position the longest candidate wins; for a given length an exact
/// hit beats a plural-folded one. Unmatched tokens are skipped.
pub fn extract_entities(tokens: &TokenStream, lexicon: &Lexicon) -> Vec<EntitySpan> {
    let words = &tokens.tokens;
    let mut spans = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let longest = MAX_ENTITY_WORDS.min(words.len() - i);
        let found = (1..=longest)
            .rev()
            .find_map(|len| match_at(&words[i..i + len], lexicon).map(|m| (len, m)));
        match found {
            Some((len, (value, confidence))) => {
                spans.push(EntitySpan {
                    value,
                    surface: words[i..i + len].join(" "),
                    token_range: i..i + len,
                    confidence,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    spans
}

fn match_at(candidate: &[String], lexicon: &Lexicon) -> Option<(EntityValue, f64)> {
    let exact = candidate.join(" ");
    if let Some(v) = lookup(&exact, lexicon) {
        return Some((v, EXACT_MATCH_CONFIDENCE));
    }
    let (head, last) = candidate.split_at(candidate.len() - 1);
    for stem in plural_stems(&last[0]) {
        let mut key = head.join(" ");
        if !key.is_empty() {
            key.push(' ');
        }
        key.push_str(stem);
        if let Some(v) = lookup(&key, lexicon) {
            return Some((v, FOLDED_MATCH_CONFIDENCE));
        }
    }
    None
}

/// Singular candidates for a token: strip "es", then "s".
pub(crate) fn plural_stems(word: &str) -> impl Iterator<Item = &str> {
    ["es", "s"]
        .into_iter()
        .filter_map(move |suffix| word.strip_suffix(suffix).filter(|s| !s.is_empty()))
}

fn lookup(key: &str, lexicon: &Lexicon) -> Option<EntityValue> {
    if let Some(&c) = lexicon.color_terms.get(key) {
        return Some(EntityValue::Color(c));
    }
    lexicon.shape_terms.get(key).map(|&s| EntityValue::Shape(s))
}
