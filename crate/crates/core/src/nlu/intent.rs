use alloc::vec::Vec;

use super::{EntityKind, EntitySpan, Intent, IntentPrediction, Lexicon, TokenStream};

/// Cancel phrases take precedence over select verbs. A select needs both a
/// trigger verb and at least one entity; anything else is `None`.
pub fn classify_intent(
    tokens: &TokenStream,
    entities: &[EntitySpan],
    lexicon: &Lexicon,
) -> IntentPrediction {
    let words = &tokens.tokens;
    let cancel = lexicon.cancel_phrases.iter().any(|phrase| {
        let parts: Vec<&str> = phrase.split(' ').collect();
        words.len() >= parts.len()
            && words
                .windows(parts.len())
                .any(|w| w.iter().zip(&parts).all(|(a, b)| a == b))
    });
    if cancel {
        return IntentPrediction {
            intent: Intent::CancelAll,
            confidence: 1.0,
        };
    }

    let has_verb = words.iter().any(|w| lexicon.select_verbs.contains(w));
    if has_verb && !entities.is_empty() {
        let has_color = entities.iter().any(|e| e.kind() == EntityKind::OriginalColor);
        let has_shape = entities.iter().any(|e| e.kind() == EntityKind::OriginalShape);
        let kinds = usize::from(has_color) + usize::from(has_shape);
        return IntentPrediction {
            intent: Intent::Select,
            confidence: (0.6 + 0.2 * kinds as f64).min(1.0),
        };
    }

    IntentPrediction {
        intent: Intent::None,
        confidence: 1.0,
    }
}
