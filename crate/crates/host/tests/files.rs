use assistvr::interactive::parse_line;
use assistvr::records::{log_text, read_records, record_lines};
use assistvr::scriptfile::{read_script, write_script, ScriptHeader};
use assistvr_core::nlu::Lexicon;
use assistvr_core::trial::{build_plan, replay_script, scripted_participant, ScriptAction, TimedAction};
use assistvr_core::{Vec2, Vec3};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    (-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn action() -> impl Strategy<Value = ScriptAction> {
    prop_oneof![
        Just(ScriptAction::Start),
        Just(ScriptAction::Confirm),
        Just(ScriptAction::Abort),
        Just(ScriptAction::Next),
        "[ -~]{0,40}".prop_map(|text| ScriptAction::Utter { text }),
        (vec3(), vec3()).prop_map(|(origin, direction)| ScriptAction::Ray { origin, direction }),
        (vec3(), vec3(), proptest::option::of(0.01f64..0.6)).prop_map(|(origin, direction, half_angle)| {
            ScriptAction::Minimap {
                origin,
                direction,
                half_angle,
            }
        }),
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| ScriptAction::Pick { point: Vec2::new(x, y) }),
    ]
}

proptest! {
    #[test]
    fn scripts_round_trip(
        participant in 0u32..100,
        order in 0u32..24,
        seed in any::<u64>(),
        steps in proptest::collection::vec((0u64..1_000_000, action()), 0..40),
    ) {
        let header = ScriptHeader::new(participant, order, seed);
        let actions: Vec<TimedAction> = steps.into_iter().map(|(at_ms, action)| TimedAction { at_ms, action }).collect();
        let mut buf = Vec::new();
        write_script(&mut buf, &header, &actions).unwrap();
        let (h, a) = read_script(&buf[..]).unwrap();
        prop_assert_eq!(h, header);
        prop_assert_eq!(a, actions);
    }

    #[test]
    fn line_parser_never_panics(line in "\\PC{0,60}") {
        let _ = parse_line(&line);
    }

    #[test]
    fn numeric_commands_parse_exactly(x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0) {
        let parsed = parse_line(&format!("ray {x} {y} {z}")).unwrap().unwrap();
        match parsed {
            assistvr_core::Command::Ray { direction, .. } => prop_assert_eq!(direction, Vec3::new(x, y, z)),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn record_logs_round_trip(participant in 0u32..50, order in 0u32..24, seed in any::<u64>(), keep in 1usize..12) {
        let lex = Lexicon::builtin();
        let mut plan = build_plan(participant, order).unwrap();
        plan.specs.truncate(keep);
        let script = scripted_participant(&plan, &lex, seed).unwrap();
        let records = replay_script(&script, &plan, &lex).unwrap();
        let text = log_text(&records);
        let back = read_records(text.as_bytes()).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            prop_assert_eq!(record_lines(a), record_lines(b));
        }
    }
}
