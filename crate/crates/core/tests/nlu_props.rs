use assistvr_core::nlu::{extract_entities, interpret, normalize, EntityValue, Intent, Lexicon};
use assistvr_core::{ColorKind, ShapeKind};
use proptest::prelude::*;

/// Every surface form in the lexicon with its value, as word lists.
fn surfaces(lex: &Lexicon) -> Vec<(Vec<String>, EntityValue)> {
    let shapes = lex
        .shape_terms
        .iter()
        .map(|(k, &v)| (k.split(' ').map(String::from).collect(), EntityValue::Shape(v)));
    let colors = lex
        .color_terms
        .iter()
        .map(|(k, &v)| (k.split(' ').map(String::from).collect(), EntityValue::Color(v)));
    shapes.chain(colors).collect()
}

/// How `window` spells `form`: 2 exactly, 1 with an "es" plural on the last
/// word, 0 with an "s" plural. `None` if it does not.
fn spells(window: &[String], form: &[String]) -> Option<u8> {
    if window.len() != form.len() {
        return None;
    }
    let n = form.len();
    if window[..n - 1] != form[..n - 1] {
        return None;
    }
    let (w, f) = (&window[n - 1], &form[n - 1]);
    if w == f {
        Some(2)
    } else if *w == format!("{f}es") {
        Some(1)
    } else if *w == format!("{f}s") {
        Some(0)
    } else {
        None
    }
}

/// Reference leftmost-longest scan: tries every lexicon entry at every
/// position and keeps the best by (length, match quality).
fn oracle(tokens: &[String], lex: &Lexicon) -> Vec<(EntityValue, std::ops::Range<usize>, bool)> {
    let forms = surfaces(lex);
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let best = forms
            .iter()
            .filter(|(form, _)| i + form.len() <= tokens.len())
            .filter_map(|(form, value)| {
                spells(&tokens[i..i + form.len()], form).map(|q| ((form.len(), q), *value))
            })
            .max_by_key(|&(rank, _)| rank);
        match best {
            Some(((len, q), value)) => {
                out.push((value, i..i + len, q == 2));
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

fn word() -> impl Strategy<Value = String> {
    let lex = Lexicon::builtin();
    let mut pool: Vec<String> = Vec::new();
    for (form, _) in surfaces(&lex) {
        pool.extend(form.iter().cloned());
        let last = form.last().unwrap();
        pool.push(format!("{last}s"));
        pool.push(format!("{last}es"));
    }
    pool.extend(
        ["the", "all", "a", "of", "select", "pick", "and", "es", "s", "those", "patterns"]
            .into_iter()
            .map(String::from),
    );
    pool.sort();
    pool.dedup();
    proptest::sample::select(pool)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn extraction_matches_reference_scan(words in proptest::collection::vec(word(), 0..9)) {
        let lex = Lexicon::builtin();
        let text = words.join(" ");
        let got: Vec<_> = extract_entities(&normalize(&text), &lex)
            .into_iter()
            .map(|s| (s.value, s.token_range, s.confidence == 1.0))
            .collect();
        prop_assert_eq!(got, oracle(&words, &lex));
    }

    #[test]
    fn case_and_punctuation_do_not_matter(words in proptest::collection::vec(word(), 1..7), upper in any::<u64>()) {
        let lex = Lexicon::builtin();
        let plain = words.join(" ");
        let noisy: String = words
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let w = if upper >> (k % 64) & 1 == 1 { w.to_uppercase() } else { w.clone() };
                format!("{w}{}", [",", " ", "!  ", "; ", "..."][k % 5])
            })
            .collect();
        prop_assert_eq!(
            interpret(&plain, &lex).map(|c| (c.intent.intent, c.color(), c.shape())),
            interpret(&noisy, &lex).map(|c| (c.intent.intent, c.color(), c.shape()))
        );
    }

    #[test]
    fn non_select_has_no_entities(words in proptest::collection::vec(word(), 0..7)) {
        let lex = Lexicon::builtin();
        if let Ok(cmd) = interpret(&words.join(" "), &lex) {
            match cmd.intent.intent {
                Intent::Select => {
                    prop_assert!(!cmd.entities.is_empty());
                    prop_assert!((0.6..=1.0).contains(&cmd.intent.confidence));
                }
                _ => prop_assert!(cmd.entities.is_empty()),
            }
        }
    }

    #[test]
    fn named_pair_round_trips(si in 0usize..8, ci in 0usize..8, plural in any::<bool>()) {
        let lex = Lexicon::builtin();
        let (shape, color) = (ShapeKind::ALL[si], ColorKind::ALL[ci]);
        let noun = match (plural, shape) {
            (false, s) => s.name().to_string(),
            (true, ShapeKind::Cross) => "crosses".to_string(),
            (true, s) => format!("{}s", s.name()),
        };
        let cmd = interpret(&format!("select the {} {noun}", color.name()), &lex).unwrap();
        prop_assert_eq!(cmd.intent.intent, Intent::Select);
        prop_assert_eq!((cmd.color(), cmd.shape()), (Some(color), Some(shape)));
    }
}

#[test]
fn cancel_beats_select() {
    let lex = Lexicon::builtin();
    let cmd = interpret("select the red cube no wait deselect all", &lex).unwrap();
    assert_eq!(cmd.intent.intent, Intent::CancelAll);
}

#[test]
fn lexicon_table_round_trips() {
    let lex = Lexicon::builtin();
    assert_eq!(Lexicon::from_table(&lex.to_table()).unwrap(), lex);
}
