//! Session state shared by the service and the interactive CLI: one scene or
//! study plan, one selection, and a delta stream describing every change.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Vec2, Vec3};
use crate::minimap::{MinimapError, MinimapLayout};
use crate::nlu::Lexicon;
use crate::scene::{
    generate_scene, palette_for, ColorKind, ObjectId, PerplexityLevel, Ray, Scene, SceneError, ShapeKind,
    TargetCount,
};
use crate::selection::{ConfirmOutcome, PanelModel, SelectionEventKind};
use crate::trial::{build_plan, ActionError, Arena, StudyPlan, Technique, TrialPhase, TrialRecord, TrialRun};

/// Wire schema version carried by every delta.
pub const SCHEMA_VERSION: u32 = 1;

/// How a session is set up: a single free-play scene, or a participant's
/// counterbalanced study plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SessionParams {
    AdHoc {
        technique: String,
        perplexity: String,
        num_targets: usize,
        seed: u64,
        #[serde(default)]
        target: Option<(String, String)>,
    },
    Plan {
        participant: u32,
        order_index: u32,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("bad session parameters: {0}")]
    BadParams(String),
    #[error("no such session: {0}")]
    NoSuchSession(u64),
    #[error("no trial is active (phase {0:?})")]
    TrialNotActive(TrialPhase),
    #[error("`{action}` is not available with {technique}")]
    WrongTechnique { action: &'static str, technique: Technique },
    #[error("`{action}` is not allowed in phase {phase:?}")]
    IllegalPhase { action: &'static str, phase: TrialPhase },
    #[error("invalid ray")]
    InvalidRay,
    #[error("no minimap is open")]
    NoMinimap,
    #[error(transparent)]
    Minimap(#[from] MinimapError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

impl From<ActionError> for SessionError {
    fn from(e: ActionError) -> Self {
        match e {
            ActionError::IllegalPhase { action, phase } => match action {
                "start" | "abort" => SessionError::IllegalPhase { action, phase },
                _ => SessionError::TrialNotActive(phase),
            },
            ActionError::WrongTechnique { action, technique } => {
                SessionError::WrongTechnique { action, technique }
            }
            ActionError::InvalidRay => SessionError::InvalidRay,
            ActionError::NoMinimap => SessionError::NoMinimap,
            ActionError::Minimap(e) => SessionError::Minimap(e),
            ActionError::Scene(e) => SessionError::Scene(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialVerb {
    Start,
    Confirm,
    Abort,
    Next,
}

impl core::str::FromStr for TrialVerb {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "start" => Ok(TrialVerb::Start),
            "confirm" => Ok(TrialVerb::Confirm),
            "abort" => Ok(TrialVerb::Abort),
            "next" => Ok(TrialVerb::Next),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Utterance {
        text: String,
    },
    Ray {
        origin: Vec3,
        direction: Vec3,
    },
    OpenMinimap {
        origin: Vec3,
        direction: Vec3,
        #[serde(default)]
        half_angle: Option<f64>,
    },
    MapPick {
        point: Vec2,
    },
    Trial {
        verb: TrialVerb,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionChange {
    pub id: ObjectId,
    pub selected: bool,
}

/// Audible feedback the client should play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tone {
    Correct,
    Incorrect,
}

/// One committed change to a session. A `snapshot` delta carries the whole
/// selection in `changed`, so applying it to an empty set and then every
/// following delta in order reproduces the live selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDelta {
    pub v: u32,
    pub session: u64,
    pub seq: u64,
    /// True when `changed` lists the full selection rather than a difference.
    pub snapshot: bool,
    pub changed: Vec<SelectionChange>,
    pub panel: PanelModel,
    pub phase: TrialPhase,
    pub countdown_remaining_ms: u64,
    pub technique: Technique,
    pub attempts: u32,
    /// 1-based plan position; absent in free play.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_count: Option<usize>,
    /// The client must refetch the scene.
    pub scene_changed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tone: Option<Tone>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimap: Option<MinimapLayout>,
}

/// Applies a delta to a client-side selection set.
pub fn apply_delta(selected: &mut BTreeSet<ObjectId>, delta: &StateDelta) {
    if delta.snapshot || delta.scene_changed {
        selected.clear();
    }
    for c in &delta.changed {
        if c.selected {
            selected.insert(c.id);
        } else {
            selected.remove(&c.id);
        }
    }
}

#[derive(Clone, Debug)]
enum Mode {
    FreePlay(Arena),
    Plan {
        plan: StudyPlan,
        cursor: usize,
        run: TrialRun,
    },
}

#[derive(Clone, Debug)]
pub struct Session {
    id: u64,
    lexicon: Arc<Lexicon>,
    mode: Mode,
    seq: u64,
    records: Vec<TrialRecord>,
}

fn parse_param<T: core::str::FromStr>(what: &str, s: &str) -> Result<T, SessionError> {
    s.parse()
        .map_err(|_| SessionError::BadParams(format!("unknown {what} `{s}`")))
}

impl Session {
    pub fn new(id: u64, params: &SessionParams, lexicon: Arc<Lexicon>) -> Result<Session, SessionError> {
        let mode = match params {
            SessionParams::AdHoc {
                technique,
                perplexity,
                num_targets,
                seed,
                target,
            } => {
                let technique: Technique = parse_param("technique", technique)?;
                let level: PerplexityLevel = parse_param("perplexity", perplexity)?;
                let n = TargetCount::from_count(*num_targets)
                    .ok_or_else(|| SessionError::BadParams(format!("num_targets must be 1, 2 or 4, got {num_targets}")))?;
                let target = match target {
                    None => None,
                    Some((shape, color)) => {
                        let pair: (ShapeKind, ColorKind) =
                            (parse_param("shape", shape)?, parse_param("color", color)?);
                        if !palette_for(level).contains(pair) {
                            return Err(SessionError::BadParams(format!(
                                "{} {} is not in the {level} palette",
                                pair.1, pair.0
                            )));
                        }
                        Some(pair)
                    }
                };
                Mode::FreePlay(Arena::new(technique, generate_scene(level, n, *seed, target)?))
            }
            SessionParams::Plan {
                participant,
                order_index,
            } => {
                let plan = build_plan(*participant, *order_index)
                    .map_err(|e| SessionError::BadParams(format!("{e}")))?;
                let run = TrialRun::new(plan.specs[0].clone())?;
                Mode::Plan { plan, cursor: 0, run }
            }
        };
        Ok(Session {
            id,
            lexicon,
            mode,
            seq: 0,
            records: Vec::new(),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn arena(&self) -> &Arena {
        match &self.mode {
            Mode::FreePlay(a) => a,
            Mode::Plan { run, .. } => run.arena(),
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.arena().scene
    }

    pub fn technique(&self) -> Technique {
        self.arena().technique
    }

    /// Finished trial records, in completion order.
    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Plan cursor as (1-based index, plan length); `None` in free play.
    pub fn cursor(&self) -> Option<(usize, usize)> {
        match &self.mode {
            Mode::FreePlay(_) => None,
            Mode::Plan { plan, cursor, .. } => Some((cursor + 1, plan.specs.len())),
        }
    }

    pub fn phase(&self) -> TrialPhase {
        match &self.mode {
            Mode::FreePlay(_) => TrialPhase::Active,
            Mode::Plan { run, .. } => run.phase(),
        }
    }

    fn base_delta(&self, now_ms: u64, snapshot: bool, changed: Vec<SelectionChange>) -> StateDelta {
        let arena = self.arena();
        let (countdown, attempts) = match &self.mode {
            Mode::FreePlay(_) => (0, 0),
            Mode::Plan { run, .. } => (run.countdown_remaining(now_ms), run.attempts()),
        };
        let cursor = self.cursor();
        StateDelta {
            v: SCHEMA_VERSION,
            session: self.id,
            seq: self.seq,
            snapshot,
            changed,
            panel: arena.selection.panel_view(&arena.scene, arena.last_command.as_ref()),
            phase: self.phase(),
            countdown_remaining_ms: countdown,
            technique: arena.technique,
            attempts,
            trial_index: cursor.map(|c| c.0),
            trial_count: cursor.map(|c| c.1),
            scene_changed: false,
            notice: None,
            tone: None,
            minimap: None,
        }
    }

    /// Full-state delta for late subscribers. Does not consume a sequence
    /// number: it describes the state as of the latest committed delta.
    pub fn snapshot(&self, now_ms: u64) -> StateDelta {
        let changed = self
            .arena()
            .selection
            .selected()
            .iter()
            .map(|&id| SelectionChange { id, selected: true })
            .collect();
        let mut d = self.base_delta(now_ms, true, changed);
        d.minimap = self.arena().layout.clone();
        d
    }

    /// Commits the countdown-to-active transition if it is due.
    pub fn tick(&mut self, now_ms: u64) -> Option<StateDelta> {
        let Mode::Plan { run, .. } = &mut self.mode else {
            return None;
        };
        if !run.advance(now_ms) {
            return None;
        }
        self.seq += 1;
        Some(self.base_delta(now_ms, false, Vec::new()))
    }

    /// Applies one command. On success exactly one delta is committed; on
    /// error nothing changes.
    pub fn apply(&mut self, cmd: &Command, now_ms: u64) -> Result<StateDelta, SessionError> {
        // Countdown expiry folds into the command that observes it.
        if let Mode::Plan { run, .. } = &mut self.mode {
            run.advance(now_ms);
        }
        let before: Vec<ObjectId> = self.arena().selection.selected().to_vec();
        let events_before = self.arena().selection.events().len();
        let mut notice = None;
        let mut tone = None;
        let mut minimap = None;
        let mut scene_changed = false;
        let lexicon = Arc::clone(&self.lexicon);

        match (&mut self.mode, cmd) {
            (Mode::FreePlay(a), Command::Utterance { text }) => {
                notice = a.utterance(text, &lexicon, now_ms)?.1;
            }
            (Mode::Plan { run, .. }, Command::Utterance { text }) => {
                notice = run.utterance(text, &lexicon, now_ms)?.1;
            }
            (Mode::FreePlay(a), Command::Ray { origin, direction }) => {
                let ray = Ray::new(*origin, *direction).ok_or(SessionError::InvalidRay)?;
                a.ray(&ray, now_ms)?;
            }
            (Mode::Plan { run, .. }, Command::Ray { origin, direction }) => {
                let ray = Ray::new(*origin, *direction).ok_or(SessionError::InvalidRay)?;
                run.ray(&ray, now_ms)?;
            }
            (Mode::FreePlay(a), Command::OpenMinimap { origin, direction, half_angle }) => {
                minimap = Some(a.open_minimap(*origin, *direction, *half_angle)?.clone());
            }
            (Mode::Plan { run, .. }, Command::OpenMinimap { origin, direction, half_angle }) => {
                minimap = Some(run.open_minimap(*origin, *direction, *half_angle, now_ms)?.clone());
            }
            (Mode::FreePlay(a), Command::MapPick { point }) => {
                a.map_pick(*point, now_ms)?;
            }
            (Mode::Plan { run, .. }, Command::MapPick { point }) => {
                run.map_pick(*point, now_ms)?;
            }
            (Mode::FreePlay(a), Command::Trial { verb }) => match verb {
                TrialVerb::Confirm => {
                    tone = Some(match a.confirm(now_ms) {
                        ConfirmOutcome::Correct => Tone::Correct,
                        ConfirmOutcome::Incorrect => Tone::Incorrect,
                    });
                }
                _ => {
                    return Err(SessionError::IllegalPhase {
                        action: verb_name(*verb),
                        phase: TrialPhase::Active,
                    })
                }
            },
            (Mode::Plan { plan, cursor, run }, Command::Trial { verb }) => match verb {
                TrialVerb::Start => run.start(now_ms)?,
                TrialVerb::Confirm => {
                    tone = Some(match run.confirm(now_ms)? {
                        ConfirmOutcome::Correct => Tone::Correct,
                        ConfirmOutcome::Incorrect => Tone::Incorrect,
                    });
                }
                TrialVerb::Abort => {
                    run.abort(now_ms)?;
                    self.records.extend(run.record());
                }
                TrialVerb::Next => {
                    let illegal = SessionError::IllegalPhase {
                        action: "next",
                        phase: run.phase(),
                    };
                    if !run.is_finished() || *cursor + 1 >= plan.specs.len() {
                        return Err(illegal);
                    }
                    let next = TrialRun::new(plan.specs[*cursor + 1].clone())?;
                    *cursor += 1;
                    *run = next;
                    scene_changed = true;
                }
            },
        }

        // Completed trials are recorded as soon as they finish.
        if let Mode::Plan { run, .. } = &self.mode {
            if run.phase() == TrialPhase::Completed && tone == Some(Tone::Correct) {
                self.records.extend(run.record());
            }
        }

        let changed = if scene_changed {
            Vec::new()
        } else {
            selection_diff(&before, self.arena().selection.selected())
        };
        if notice.is_none() && !scene_changed {
            notice = self.arena().selection.events()[events_before..]
                .iter()
                .any(|e| e.kind == SelectionEventKind::SpeechNone)
                .then(|| String::from(crate::selection::NOT_RECOGNIZED));
        }
        self.seq += 1;
        let mut delta = self.base_delta(now_ms, false, changed);
        delta.scene_changed = scene_changed;
        delta.notice = notice;
        delta.tone = tone;
        delta.minimap = minimap;
        Ok(delta)
    }
}

fn verb_name(v: TrialVerb) -> &'static str {
    match v {
        TrialVerb::Start => "start",
        TrialVerb::Confirm => "confirm",
        TrialVerb::Abort => "abort",
        TrialVerb::Next => "next",
    }
}

fn selection_diff(before: &[ObjectId], after: &[ObjectId]) -> Vec<SelectionChange> {
    let mut out: Vec<SelectionChange> = before
        .iter()
        .filter(|id| !after.contains(id))
        .map(|&id| SelectionChange { id, selected: false })
        .collect();
    out.extend(
        after
            .iter()
            .filter(|id| !before.contains(id))
            .map(|&id| SelectionChange { id, selected: true }),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn ad_hoc(technique: &str) -> SessionParams {
        SessionParams::AdHoc {
            technique: technique.to_string(),
            perplexity: "low".to_string(),
            num_targets: 1,
            seed: 42,
            target: Some(("sphere".to_string(), "purple".to_string())),
        }
    }

    fn lex() -> Arc<Lexicon> {
        Arc::new(Lexicon::builtin())
    }

    #[test]
    fn ad_hoc_scene_has_121_objects() {
        let s = Session::new(1, &ad_hoc("AssistVR"), lex()).unwrap();
        assert_eq!(s.scene().objects.len(), 121);
        assert_eq!(s.cursor(), None);
    }

    #[test]
    fn bad_params() {
        assert!(matches!(
            Session::new(1, &ad_hoc("gaze"), lex()),
            Err(SessionError::BadParams(_))
        ));
        let p = SessionParams::AdHoc {
            technique: "assistvr".to_string(),
            perplexity: "low".to_string(),
            num_targets: 3,
            seed: 1,
            target: None,
        };
        assert!(matches!(Session::new(1, &p, lex()), Err(SessionError::BadParams(_))));
        let p = SessionParams::Plan {
            participant: 1,
            order_index: 24,
        };
        assert!(matches!(Session::new(1, &p, lex()), Err(SessionError::BadParams(_))));
    }

    #[test]
    fn plan_cursor_starts_at_one() {
        let p = SessionParams::Plan {
            participant: 4,
            order_index: 3,
        };
        let s = Session::new(9, &p, lex()).unwrap();
        assert_eq!(s.cursor(), Some((1, 108)));
        assert_eq!(s.phase(), TrialPhase::Ready);
    }

    #[test]
    fn speech_deltas_reconstruct_selection() {
        let mut s = Session::new(1, &ad_hoc("assistvr"), lex()).unwrap();
        let mut mirror = BTreeSet::new();
        let d = s
            .apply(&Command::Utterance { text: "select all purple spheres".to_string() }, 10)
            .unwrap();
        assert_eq!(d.seq, 1);
        assert_eq!(d.v, 1);
        apply_delta(&mut mirror, &d);
        assert_eq!(mirror, s.arena().selection.selected_set());
        assert_eq!(mirror.len(), 1);

        let d = s.apply(&Command::Utterance { text: "asdf qwerty".to_string() }, 20).unwrap();
        assert!(d.changed.is_empty());
        assert!(d.notice.is_some());

        let d = s.apply(&Command::Utterance { text: "deselect all".to_string() }, 30).unwrap();
        apply_delta(&mut mirror, &d);
        assert!(mirror.is_empty());
        assert_eq!(d.seq, 3);
    }

    #[test]
    fn ambiguous_command_carries_notice() {
        let mut s = Session::new(1, &ad_hoc("assistvr"), lex()).unwrap();
        let d = s
            .apply(&Command::Utterance { text: "select the red blue cube".to_string() }, 0)
            .unwrap();
        assert!(d.notice.unwrap().contains("ambiguous"));
        assert!(d.changed.is_empty());
    }

    #[test]
    fn discpim_rejects_speech_and_errors_do_not_bump_seq() {
        let mut s = Session::new(1, &ad_hoc("discpim"), lex()).unwrap();
        let err = s
            .apply(&Command::Utterance { text: "select red".to_string() }, 0)
            .unwrap_err();
        assert!(matches!(err, SessionError::WrongTechnique { .. }));
        assert_eq!(s.seq(), 0);
        let err = s.apply(&Command::MapPick { point: Vec2::ZERO }, 0).unwrap_err();
        assert_eq!(err, SessionError::NoMinimap);
    }

    #[test]
    fn plan_trial_lifecycle() {
        let p = SessionParams::Plan {
            participant: 2,
            order_index: 0,
        };
        let mut s = Session::new(1, &p, lex()).unwrap();
        let start = Command::Trial { verb: TrialVerb::Start };
        let confirm = Command::Trial { verb: TrialVerb::Confirm };
        let next = Command::Trial { verb: TrialVerb::Next };
        assert!(matches!(s.apply(&confirm, 0), Err(SessionError::TrialNotActive(_))));
        let d = s.apply(&start, 0).unwrap();
        assert_eq!(d.countdown_remaining_ms, 3_000);
        assert!(s.tick(1_000).is_none());
        let d = s.tick(3_000).unwrap();
        assert_eq!(d.phase, TrialPhase::Active);
        let d = s.apply(&confirm, 3_500).unwrap();
        assert_eq!((d.tone, d.attempts), (Some(Tone::Incorrect), 2));
        assert!(matches!(s.apply(&next, 3_600), Err(SessionError::IllegalPhase { .. })));

        let (shape, color) = s.arena().scene.targets().next().unwrap().pair();
        let text = format!("select the {} {}", color.name(), shape.name());
        s.apply(&Command::Utterance { text }, 4_000).unwrap();
        let d = s.apply(&confirm, 5_000).unwrap();
        assert_eq!(d.tone, Some(Tone::Correct));
        assert_eq!(d.phase, TrialPhase::Completed);
        assert_eq!(s.records().len(), 1);
        assert_eq!(s.records()[0].completion_ms, 2_000);

        let d = s.apply(&next, 6_000).unwrap();
        assert!(d.scene_changed);
        assert_eq!(d.trial_index, Some(2));
        assert_eq!(d.phase, TrialPhase::Ready);
    }

    #[test]
    fn snapshot_reflects_selection() {
        let mut s = Session::new(1, &ad_hoc("assistvr"), lex()).unwrap();
        s.apply(&Command::Utterance { text: "select spheres".to_string() }, 0)
            .unwrap();
        let snap = s.snapshot(0);
        assert!(snap.snapshot);
        assert_eq!(snap.seq, 1);
        let mut mirror = BTreeSet::new();
        apply_delta(&mut mirror, &snap);
        assert_eq!(mirror, s.arena().selection.selected_set());
    }
}
