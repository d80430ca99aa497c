//! Selection state and the rules that mutate it: speech resolution against
//! object materials, raycast toggling, and the trial correctness check.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::nlu::{CommandInterpretation, Intent, NluError};
use crate::scene::{raycast, ColorKind, ObjectId, Ray, Scene, SceneObject, ShapeKind};

/// Panel text when there is nothing recognized to echo.
pub const NOT_RECOGNIZED: &str = "speech not recognized";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionEventKind {
    SpeechSelect,
    SpeechCancelAll,
    SpeechNone,
    SpeechAmbiguous,
    RaySelect,
    RayDeselect,
    Confirm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionEvent {
    pub at_ms: u64,
    pub kind: SelectionEventKind,
    /// SpeechSelect: every matched id. SpeechCancelAll: the ids cleared.
    /// Ray events: the toggled id. Confirm: the selection being confirmed.
    pub ids: Vec<ObjectId>,
    pub text: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfirmOutcome {
    Correct,
    Incorrect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeechOutcome {
    pub kind: SelectionEventKind,
    /// Objects the command resolved to (empty for non-select commands).
    pub matched: Vec<ObjectId>,
    pub added: Vec<ObjectId>,
    pub removed: Vec<ObjectId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToggleOutcome {
    pub id: ObjectId,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelEntry {
    pub id: ObjectId,
    pub shape: ShapeKind,
    pub color: ColorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelModel {
    pub recognized_text: String,
    pub entries: Vec<PanelEntry>,
}

/// Currently selected ids, in selection order, plus the append-only log that
/// produced them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelectionState {
    selected: Vec<ObjectId>,
    events: Vec<SelectionEvent>,
}

/// Does `o` satisfy the color/shape slots of a select command? Missing slots
/// match anything; a command with neither slot matches nothing.
pub fn matches_command(o: &SceneObject, color: Option<ColorKind>, shape: Option<ShapeKind>) -> bool {
    if color.is_none() && shape.is_none() {
        return false;
    }
    color.is_none_or(|c| o.color == c) && shape.is_none_or(|s| o.shape == s)
}

impl SelectionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn selected(&self) -> &[ObjectId] {
        &self.selected
    }

    pub fn selected_set(&self) -> BTreeSet<ObjectId> {
        self.selected.iter().copied().collect()
    }

    pub fn is_selected(&self, id: ObjectId) -> bool {
        self.selected.contains(&id)
    }

    pub fn events(&self) -> &[SelectionEvent] {
        &self.events
    }

    fn push(&mut self, at_ms: u64, kind: SelectionEventKind, ids: Vec<ObjectId>, text: Option<String>) {
        // Timestamps never go backwards.
        let at_ms = self.events.last().map_or(at_ms, |e| e.at_ms.max(at_ms));
        self.events.push(SelectionEvent {
            at_ms,
            kind,
            ids,
            text,
        });
    }

    fn insert(&mut self, id: ObjectId) -> bool {
        if self.is_selected(id) {
            false
        } else {
            self.selected.push(id);
            true
        }
    }

    fn remove(&mut self, id: ObjectId) -> bool {
        let before = self.selected.len();
        self.selected.retain(|&x| x != id);
        before != self.selected.len()
    }

    /// Applies an interpreted command. Selects are additive; `CancelAll`
    /// clears; `None` only logs.
    pub fn apply_speech(
        &mut self,
        scene: &Scene,
        cmd: &CommandInterpretation,
        at_ms: u64,
    ) -> SpeechOutcome {
        let text = Some(cmd.recognized_text.clone());
        match cmd.intent.intent {
            Intent::Select => {
                let (color, shape) = (cmd.color(), cmd.shape());
                let matched: Vec<ObjectId> = scene
                    .objects
                    .iter()
                    .filter(|o| matches_command(o, color, shape))
                    .map(|o| o.id)
                    .collect();
                let added: Vec<ObjectId> = matched.iter().copied().filter(|&id| self.insert(id)).collect();
                self.push(at_ms, SelectionEventKind::SpeechSelect, matched.clone(), text);
                SpeechOutcome {
                    kind: SelectionEventKind::SpeechSelect,
                    matched,
                    added,
                    removed: Vec::new(),
                }
            }
            Intent::CancelAll => {
                let removed = core::mem::take(&mut self.selected);
                self.push(at_ms, SelectionEventKind::SpeechCancelAll, removed.clone(), text);
                SpeechOutcome {
                    kind: SelectionEventKind::SpeechCancelAll,
                    matched: Vec::new(),
                    added: Vec::new(),
                    removed,
                }
            }
            Intent::None => {
                self.push(at_ms, SelectionEventKind::SpeechNone, Vec::new(), text);
                SpeechOutcome {
                    kind: SelectionEventKind::SpeechNone,
                    matched: Vec::new(),
                    added: Vec::new(),
                    removed: Vec::new(),
                }
            }
        }
    }

    /// Like [`apply_speech`](Self::apply_speech) but also accepts a parse
    /// failure, which is logged as `SpeechAmbiguous` and changes nothing.
    pub fn apply_parse(
        &mut self,
        scene: &Scene,
        parsed: &Result<CommandInterpretation, NluError>,
        at_ms: u64,
    ) -> SpeechOutcome {
        match parsed {
            Ok(cmd) => self.apply_speech(scene, cmd, at_ms),
            Err(NluError::AmbiguousCommand {
                recognized_text, ..
            }) => {
                self.push(
                    at_ms,
                    SelectionEventKind::SpeechAmbiguous,
                    Vec::new(),
                    Some(recognized_text.clone()),
                );
                SpeechOutcome {
                    kind: SelectionEventKind::SpeechAmbiguous,
                    matched: Vec::new(),
                    added: Vec::new(),
                    removed: Vec::new(),
                }
            }
        }
    }

    /// Flips membership of the object the ray hits. A miss changes nothing
    /// and logs nothing.
    pub fn apply_ray(&mut self, scene: &Scene, ray: &Ray, at_ms: u64) -> Option<ToggleOutcome> {
        let hit = raycast(scene, ray).hit?;
        Some(self.toggle(hit.id, at_ms))
    }

    /// Toggle semantics shared by ray and minimap picks.
    pub fn toggle(&mut self, id: ObjectId, at_ms: u64) -> ToggleOutcome {
        let selected = if self.remove(id) {
            self.push(at_ms, SelectionEventKind::RayDeselect, alloc::vec![id], None);
            false
        } else {
            self.insert(id);
            self.push(at_ms, SelectionEventKind::RaySelect, alloc::vec![id], None);
            true
        };
        ToggleOutcome { id, selected }
    }

    /// Correct iff the selection equals the target set exactly.
    pub fn confirm(&mut self, scene: &Scene, at_ms: u64) -> ConfirmOutcome {
        let targets: BTreeSet<ObjectId> = scene.targets().map(|o| o.id).collect();
        let outcome = if self.selected_set() == targets {
            ConfirmOutcome::Correct
        } else {
            ConfirmOutcome::Incorrect
        };
        let text = match outcome {
            ConfirmOutcome::Correct => "correct",
            ConfirmOutcome::Incorrect => "incorrect",
        };
        self.push(
            at_ms,
            SelectionEventKind::Confirm,
            self.selected.clone(),
            Some(String::from(text)),
        );
        outcome
    }

    pub fn panel_view(&self, scene: &Scene, last: Option<&CommandInterpretation>) -> PanelModel {
        // Nothing said yet leaves the text blank.
        let recognized_text = match last {
            None => String::new(),
            Some(cmd) if cmd.intent.intent == Intent::None => String::from(NOT_RECOGNIZED),
            Some(cmd) => cmd.recognized_text.clone(),
        };
        let entries = self
            .selected
            .iter()
            .filter_map(|&id| scene.object(id))
            .map(|o| PanelEntry {
                id: o.id,
                shape: o.shape,
                color: o.color,
            })
            .collect();
        PanelModel {
            recognized_text,
            entries,
        }
    }

    /// Rebuilds a state by folding an event log over an empty selection.
    pub fn replay(events: &[SelectionEvent]) -> SelectionState {
        let mut state = SelectionState::new();
        for e in events {
            match e.kind {
                SelectionEventKind::SpeechSelect | SelectionEventKind::RaySelect => {
                    for &id in &e.ids {
                        state.insert(id);
                    }
                }
                SelectionEventKind::SpeechCancelAll => state.selected.clear(),
                SelectionEventKind::RayDeselect => {
                    for &id in &e.ids {
                        state.remove(id);
                    }
                }
                SelectionEventKind::SpeechNone
                | SelectionEventKind::SpeechAmbiguous
                | SelectionEventKind::Confirm => {}
            }
            state.events.push(e.clone());
        }
        state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::nlu::{interpret, Lexicon};
    use crate::scene::{
        generate_scene, Orientation, PerplexityLevel, TargetCount, VIEWPOINT,
    };
    use alloc::vec;

    /// Four purple spheres among a few distractors, like the panel figure.
    fn purple_sphere_scene() -> Scene {
        let mut objects = Vec::new();
        let mut push = |shape, color, x: f64, target| {
            let id = ObjectId(objects.len() as u32);
            objects.push(SceneObject {
                id,
                shape,
                color,
                position: Vec3::new(x, 1.6, 6.0),
                orientation: Orientation::default(),
                bounding_radius: 0.25,
                is_target: target,
            });
        };
        push(ShapeKind::Cube, ColorKind::Purple, -3.0, false);
        for k in 0..4 {
            push(ShapeKind::Sphere, ColorKind::Purple, -2.0 + k as f64, true);
        }
        push(ShapeKind::Sphere, ColorKind::Blue, 3.0, false);
        Scene::from_objects(PerplexityLevel::Low, TargetCount::Four, 0, objects)
    }

    #[test]
    fn select_all_purple_spheres() {
        let lex = Lexicon::builtin();
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        let cmd = interpret("Select all purple spheres", &lex).unwrap();
        let out = st.apply_speech(&scene, &cmd, 10);
        assert_eq!(out.matched, vec![ObjectId(1), ObjectId(2), ObjectId(3), ObjectId(4)]);
        assert_eq!(st.confirm(&scene, 20), ConfirmOutcome::Correct);
        let panel = st.panel_view(&scene, Some(&cmd));
        assert_eq!(panel.recognized_text, "select all purple spheres");
        assert_eq!(panel.entries.len(), 4);
    }

    #[test]
    fn color_only_and_shape_only() {
        let lex = Lexicon::builtin();
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        st.apply_speech(&scene, &interpret("select purple", &lex).unwrap(), 0);
        assert_eq!(st.selected().len(), 5);
        let mut st = SelectionState::new();
        st.apply_speech(&scene, &interpret("select spheres", &lex).unwrap(), 0);
        assert_eq!(st.selected().len(), 5);
    }

    #[test]
    fn cancel_all_clears() {
        let lex = Lexicon::builtin();
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        st.apply_speech(&scene, &interpret("select purple", &lex).unwrap(), 0);
        let cmd = interpret("deselect all", &lex).unwrap();
        let out = st.apply_speech(&scene, &cmd, 5);
        assert_eq!(out.removed.len(), 5);
        assert!(st.selected().is_empty());
        assert!(st.panel_view(&scene, Some(&cmd)).entries.is_empty());
    }

    #[test]
    fn none_intent_keeps_state_and_shows_notice() {
        let lex = Lexicon::builtin();
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        st.apply_speech(&scene, &interpret("grab blue", &lex).unwrap(), 0);
        let before = st.selected().to_vec();
        let cmd = interpret("asdf qwerty", &lex).unwrap();
        st.apply_speech(&scene, &cmd, 1);
        assert_eq!(st.selected(), &before[..]);
        let panel = st.panel_view(&scene, Some(&cmd));
        assert_eq!(panel.recognized_text, NOT_RECOGNIZED);
        assert_eq!(panel.entries.len(), 1);
        assert_eq!(st.panel_view(&scene, None).recognized_text, "");
    }

    #[test]
    fn ambiguous_is_logged_without_change() {
        let lex = Lexicon::builtin();
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        let parsed = interpret("select the red barrel and the blue cube", &lex);
        let out = st.apply_parse(&scene, &parsed, 3);
        assert_eq!(out.kind, SelectionEventKind::SpeechAmbiguous);
        assert!(st.selected().is_empty());
        assert_eq!(st.events().len(), 1);
    }

    #[test]
    fn ray_toggles_and_misses() {
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        let ray = Ray::towards(VIEWPOINT, Vec3::new(3.0, 1.6, 6.0)).unwrap();
        assert_eq!(
            st.apply_ray(&scene, &ray, 0),
            Some(ToggleOutcome { id: ObjectId(5), selected: true })
        );
        assert_eq!(
            st.apply_ray(&scene, &ray, 1),
            Some(ToggleOutcome { id: ObjectId(5), selected: false })
        );
        let miss = Ray::new(VIEWPOINT, Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let before = st.clone();
        assert_eq!(st.apply_ray(&scene, &miss, 2), None);
        assert_eq!(st, before);
        assert_eq!(st.events()[1].kind, SelectionEventKind::RayDeselect);
    }

    #[test]
    fn confirm_rules() {
        let scene = generate_scene(PerplexityLevel::Low, TargetCount::One, 8, None).unwrap();
        let mut st = SelectionState::new();
        assert_eq!(st.confirm(&scene, 0), ConfirmOutcome::Incorrect);
        let target = scene.target_ids()[0];
        st.toggle(target, 1);
        assert_eq!(st.confirm(&scene, 2), ConfirmOutcome::Correct);
        st.toggle(ObjectId(0), 3);
        assert_eq!(st.confirm(&scene, 4), ConfirmOutcome::Incorrect);
        assert_eq!(
            st.events().iter().filter(|e| e.kind == SelectionEventKind::Confirm).count(),
            3
        );
    }

    #[test]
    fn timestamps_never_decrease() {
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        st.toggle(ObjectId(1), 50);
        st.toggle(ObjectId(2), 20);
        assert_eq!(st.events()[1].at_ms, 50);
        let _ = scene;
    }

    #[test]
    fn replay_rebuilds_selection() {
        let lex = Lexicon::builtin();
        let scene = purple_sphere_scene();
        let mut st = SelectionState::new();
        st.apply_speech(&scene, &interpret("select spheres", &lex).unwrap(), 0);
        st.toggle(ObjectId(2), 1);
        st.toggle(ObjectId(0), 2);
        st.apply_speech(&scene, &interpret("what", &lex).unwrap(), 3);
        assert_eq!(SelectionState::replay(st.events()), st);
    }
}
