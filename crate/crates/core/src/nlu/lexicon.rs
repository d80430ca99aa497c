use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::normalize;
use crate::scene::{ColorKind, ShapeKind};

const DEFAULT_TABLE: &str = include_str!("default_lexicon.tsv");

/// Longest shape or color surface form, in words.
pub const MAX_ENTITY_WORDS: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no surface form for shape `{0}`")]
    MissingShape(ShapeKind),
    #[error("no surface form for color `{0}`")]
    MissingColor(ColorKind),
    #[error("surface form `{0}` is used by more than one category")]
    Conflict(String),
    #[error("surface form `{0}` is not lowercase single-space-separated words")]
    NotNormalized(String),
    #[error("surface form `{0}` has more than {MAX_ENTITY_WORDS} words")]
    TooLong(String),
}

/// Surface vocabulary the command parser recognizes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lexicon {
    pub shape_terms: BTreeMap<String, ShapeKind>,
    pub color_terms: BTreeMap<String, ColorKind>,
    pub select_verbs: BTreeSet<String>,
    pub cancel_phrases: BTreeSet<String>,
}

impl Lexicon {
    /// The embedded lexicon. Always valid.
    pub fn builtin() -> Lexicon {
        Lexicon::from_table(DEFAULT_TABLE).expect("embedded lexicon is valid")
    }

    /// Text of the embedded table file.
    pub fn builtin_table() -> &'static str {
        DEFAULT_TABLE
    }

    /// Parses a `kind<TAB>surface<TAB>canonical` table and validates it.
    pub fn from_table(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim_end_matches('\r');
            if content.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = content.split('\t').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(LexiconError::Parse {
                    line,
                    message: "expected kind<TAB>surface<TAB>canonical".to_string(),
                });
            }
            let (kind, surface, canonical) = (cols[0], cols[1].to_string(), cols[2]);
            let bad = |message: &str| LexiconError::Parse {
                line,
                message: message.to_string(),
            };
            match kind {
                "shape" => {
                    let s = canonical.parse::<ShapeKind>().map_err(|_| bad("unknown shape"))?;
                    if lex.shape_terms.insert(surface.clone(), s).is_some_and(|old| old != s) {
                        return Err(LexiconError::Conflict(surface));
                    }
                }
                "color" => {
                    let c = canonical.parse::<ColorKind>().map_err(|_| bad("unknown color"))?;
                    if lex.color_terms.insert(surface.clone(), c).is_some_and(|old| old != c) {
                        return Err(LexiconError::Conflict(surface));
                    }
                }
                "verb" => {
                    if canonical != "select" {
                        return Err(bad("verb canonical must be `select`"));
                    }
                    lex.select_verbs.insert(surface);
                }
                "cancel" => {
                    if canonical != "cancel_all" {
                        return Err(bad("cancel canonical must be `cancel_all`"));
                    }
                    lex.cancel_phrases.insert(surface);
                }
                _ => return Err(bad("kind must be shape, color, verb or cancel")),
            }
        }
        lex.validate()?;
        Ok(lex)
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        for &s in ShapeKind::ALL {
            if !self.shape_terms.values().any(|&v| v == s) {
                return Err(LexiconError::MissingShape(s));
            }
        }
        for &c in ColorKind::ALL {
            if !self.color_terms.values().any(|&v| v == c) {
                return Err(LexiconError::MissingColor(c));
            }
        }
        let all = self
            .shape_terms
            .keys()
            .chain(self.color_terms.keys())
            .chain(self.select_verbs.iter())
            .chain(self.cancel_phrases.iter());
        for surface in all {
            if normalize(surface).recognized_text() != *surface {
                return Err(LexiconError::NotNormalized(surface.clone()));
            }
        }
        for surface in self.shape_terms.keys().chain(self.color_terms.keys()) {
            if surface.split(' ').count() > MAX_ENTITY_WORDS {
                return Err(LexiconError::TooLong(surface.clone()));
            }
        }
        for verb in &self.select_verbs {
            if verb.contains(' ') {
                return Err(LexiconError::NotNormalized(verb.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for surface in self
            .shape_terms
            .keys()
            .chain(self.color_terms.keys())
            .chain(self.select_verbs.iter())
        {
            if !seen.insert(surface.as_str()) {
                return Err(LexiconError::Conflict(surface.clone()));
            }
        }
        Ok(())
    }

    /// Renders the lexicon back into table form, grouped by kind.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# kind\tsurface\tcanonical\n");
        for (k, v) in &self.shape_terms {
            let _ = writeln!(out, "shape\t{k}\t{}", v.token());
        }
        for (k, v) in &self.color_terms {
            let _ = writeln!(out, "color\t{k}\t{}", v.token());
        }
        for k in &self.select_verbs {
            let _ = writeln!(out, "verb\t{k}\tselect");
        }
        for k in &self.cancel_phrases {
            let _ = writeln!(out, "cancel\t{k}\tcancel_all");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_is_valid_and_covers_palettes() {
        let lex = Lexicon::builtin();
        assert!(lex.validate().is_ok());
        assert_eq!(lex.shape_terms.get("truncated cylinder"), Some(&ShapeKind::TruncatedCylinder));
        assert_eq!(lex.color_terms.get("purple pattern"), Some(&ColorKind::PurplePattern));
        assert!(lex.select_verbs.contains("select"));
        assert!(lex.cancel_phrases.contains("deselect all"));
    }

    #[test]
    fn table_round_trips() {
        let lex = Lexicon::builtin();
        assert_eq!(Lexicon::from_table(&lex.to_table()).unwrap(), lex);
    }

    #[test]
    fn shape_and_color_cannot_share_a_surface() {
        let mut table = String::from(Lexicon::builtin_table());
        table.push_str("color\tcube\tred\n");
        assert_eq!(
            Lexicon::from_table(&table),
            Err(LexiconError::Conflict("cube".to_string()))
        );
    }

    #[test]
    fn every_canonical_needs_a_surface() {
        let table: String = Lexicon::builtin_table()
            .lines()
            .filter(|l| !l.ends_with("\tcross"))
            .flat_map(|l| [l, "\n"])
            .collect();
        assert_eq!(
            Lexicon::from_table(&table),
            Err(LexiconError::MissingShape(ShapeKind::Cross))
        );
    }

    #[test]
    fn rejects_unnormalized_and_malformed_rows() {
        let mut table = String::from(Lexicon::builtin_table());
        table.push_str("shape\tBig  Cube\tcube\n");
        assert!(matches!(
            Lexicon::from_table(&table),
            Err(LexiconError::NotNormalized(_))
        ));
        assert!(matches!(
            Lexicon::from_table("shape cube cube\n"),
            Err(LexiconError::Parse { line: 1, .. })
        ));
        let mut table = String::from(Lexicon::builtin_table());
        table.push_str("shape\tvery big cube\tcube\n");
        assert!(matches!(Lexicon::from_table(&table), Err(LexiconError::TooLong(_))));
    }
}
