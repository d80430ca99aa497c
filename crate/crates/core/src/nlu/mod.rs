//! Command understanding: utterance text in, intent plus color/shape slots out.
//!
//! A small rule parser over a lexicon. Three intents (`Select`, `CancelAll`,
//! `None`) and two entity kinds (original color, original shape) cover the
//! whole selection grammar, so every decision here is deterministic.

mod extract;
mod intent;
mod lexicon;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::scene::{ColorKind, ShapeKind};

pub use extract::extract_entities;
pub use intent::classify_intent;
pub use lexicon::{Lexicon, LexiconError, MAX_ENTITY_WORDS};

/// Confidence of an exact lexicon hit.
pub const EXACT_MATCH_CONFIDENCE: f64 = 1.0;
/// Confidence of a hit that needed plural folding.
pub const FOLDED_MATCH_CONFIDENCE: f64 = 0.8;

/// Lowercased word tokens of an utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub raw: String,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn recognized_text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Lowercases, drops apostrophes, and splits on every other non-alphanumeric
/// character.
pub fn normalize(raw: &str) -> TokenStream {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in raw.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if ch == '\'' || ch == '\u{2019}' {
            // "don't" -> "dont"
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenStream {
        tokens,
        raw: String::from(raw),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    OriginalColor,
    OriginalShape,
}

/// Canonical slot value; its variant fixes the entity kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "canonical")]
pub enum EntityValue {
    #[serde(rename = "OriginalColor")]
    Color(ColorKind),
    #[serde(rename = "OriginalShape")]
    Shape(ShapeKind),
}

impl EntityValue {
    pub fn kind(self) -> EntityKind {
        match self {
            EntityValue::Color(_) => EntityKind::OriginalColor,
            EntityValue::Shape(_) => EntityKind::OriginalShape,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    #[serde(flatten)]
    pub value: EntityValue,
    /// Matched tokens, space-joined, as they appeared.
    pub surface: String,
    pub token_range: Range<usize>,
    pub confidence: f64,
}

impl EntitySpan {
    pub fn kind(&self) -> EntityKind {
        self.value.kind()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Intent {
    Select,
    CancelAll,
    None,
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Intent::Select => "Select",
            Intent::CancelAll => "CancelAll",
            Intent::None => "None",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntentPrediction {
    pub intent: Intent,
    pub confidence: f64,
}

/// Parsed form of one utterance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandInterpretation {
    pub intent: IntentPrediction,
    pub entities: Vec<EntitySpan>,
    pub recognized_text: String,
}

impl CommandInterpretation {
    pub fn color(&self) -> Option<ColorKind> {
        self.entities.iter().find_map(|e| match e.value {
            EntityValue::Color(c) => Some(c),
            _ => None,
        })
    }

    pub fn shape(&self) -> Option<ShapeKind> {
        self.entities.iter().find_map(|e| match e.value {
            EntityValue::Shape(s) => Some(s),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NluError {
    /// A select command named more than one distinct color or shape.
    #[error("ambiguous command `{recognized_text}`: please name one color and one shape")]
    AmbiguousCommand {
        recognized_text: String,
        colors: Vec<ColorKind>,
        shapes: Vec<ShapeKind>,
    },
}

/// normalize -> extract_entities -> classify_intent, then enforce the
/// one-slot-per-kind rule for selections.
pub fn interpret(raw: &str, lexicon: &Lexicon) -> Result<CommandInterpretation, NluError> {
    let tokens = normalize(raw);
    let entities = extract_entities(&tokens, lexicon);
    let intent = classify_intent(&tokens, &entities, lexicon);
    let recognized_text = tokens.recognized_text();

    if intent.intent != Intent::Select {
        return Ok(CommandInterpretation {
            intent,
            entities: Vec::new(),
            recognized_text,
        });
    }

    let mut colors: Vec<ColorKind> = Vec::new();
    let mut shapes: Vec<ShapeKind> = Vec::new();
    let mut kept = Vec::new();
    for span in entities {
        let fresh = match span.value {
            EntityValue::Color(c) if !colors.contains(&c) => {
                colors.push(c);
                true
            }
            EntityValue::Shape(s) if !shapes.contains(&s) => {
                shapes.push(s);
                true
            }
            _ => false,
        };
        // Repeats of an already-seen canonical are dropped.
        if fresh {
            kept.push(span);
        }
    }
    if colors.len() > 1 || shapes.len() > 1 {
        return Err(NluError::AmbiguousCommand {
            recognized_text,
            colors,
            shapes,
        });
    }
    Ok(CommandInterpretation {
        intent,
        entities: kept,
        recognized_text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toks(s: &str) -> Vec<String> {
        normalize(s).tokens
    }

    #[test]
    fn normalize_folds_case_and_punctuation() {
        assert_eq!(toks("Select the Purple Cube!"), vec!["select", "the", "purple", "cube"]);
        assert!(toks("").is_empty());
        assert_eq!(toks("  deselect   ALL. "), vec!["deselect", "all"]);
        assert_eq!(toks("purple-pattern, barrels?"), vec!["purple", "pattern", "barrels"]);
        assert_eq!(normalize("Hi!").raw, "Hi!");
    }

    #[test]
    fn figure_three_command() {
        let lex = Lexicon::builtin();
        let c = interpret("Select all purple spheres", &lex).unwrap();
        assert_eq!(c.intent.intent, Intent::Select);
        assert_eq!(c.color(), Some(ColorKind::Purple));
        assert_eq!(c.shape(), Some(ShapeKind::Sphere));
        assert_eq!(c.recognized_text, "select all purple spheres");
    }

    #[test]
    fn cancel_has_no_entities() {
        let lex = Lexicon::builtin();
        let c = interpret("clear selection", &lex).unwrap();
        assert_eq!(c.intent.intent, Intent::CancelAll);
        assert!(c.entities.is_empty());
        let c = interpret("deselect all the red cubes", &lex).unwrap();
        assert_eq!(c.intent.intent, Intent::CancelAll);
        assert!(c.entities.is_empty());
    }

    #[test]
    fn two_colors_and_shapes_are_ambiguous() {
        let lex = Lexicon::builtin();
        let e = interpret("select the red barrel and the blue cube", &lex).unwrap_err();
        let NluError::AmbiguousCommand { colors, shapes, .. } = e;
        assert_eq!(colors, vec![ColorKind::Red, ColorKind::Blue]);
        assert_eq!(shapes, vec![ShapeKind::Barrel, ShapeKind::Cube]);
    }

    #[test]
    fn repeated_canonical_is_not_ambiguous() {
        let lex = Lexicon::builtin();
        let c = interpret("select purple cubes, the purple ones", &lex).unwrap();
        assert_eq!(c.entities.len(), 2);
    }

    #[test]
    fn none_intent_drops_entities() {
        let lex = Lexicon::builtin();
        let c = interpret("the sky is blue", &lex).unwrap();
        assert_eq!(c.intent.intent, Intent::None);
        assert!(c.entities.is_empty());
    }

    #[test]
    fn interpretation_is_idempotent_on_its_text() {
        let lex = Lexicon::builtin();
        let a = interpret("Grab the Yellow-Pattern crosses!", &lex).unwrap();
        let b = interpret(&a.recognized_text, &lex).unwrap();
        assert_eq!(a, b);
    }
}
