use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::run::{ActionError, TrialPhase, TrialRun, COUNTDOWN_MS};
use super::{StudyPlan, Technique, TrialRecord, TrialSpec};
use crate::geometry::{Vec2, Vec3};
use crate::minimap::{expand_overlaps, project, MinimapConfig};
use crate::nlu::{interpret, Intent, Lexicon};
use crate::rng;
use crate::scene::{raycast, ColorKind, ObjectId, Ray, SceneError, SceneObject, ShapeKind, VIEWPOINT};

/// One step of a scripted session. `Next` closes the finished trial and moves
/// the cursor to the following plan entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ScriptAction {
    Start,
    Utter { text: String },
    Ray { origin: Vec3, direction: Vec3 },
    Minimap {
        origin: Vec3,
        direction: Vec3,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_angle: Option<f64>,
    },
    Pick { point: Vec2 },
    Confirm,
    Abort,
    Next,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedAction {
    pub at_ms: u64,
    #[serde(flatten)]
    pub action: ScriptAction,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReplayError {
    #[error("script step {step}: {reason}")]
    ScriptDesync { step: usize, reason: String },
    #[error("script step {step}: {source}")]
    Action {
        step: usize,
        #[source]
        source: ActionError,
    },
    #[error(transparent)]
    Scene(#[from] SceneError),
}

fn desync(step: usize, reason: impl Into<String>) -> ReplayError {
    ReplayError::ScriptDesync {
        step,
        reason: reason.into(),
    }
}

fn apply(
    run: &mut TrialRun,
    step: usize,
    ta: &TimedAction,
    lexicon: &Lexicon,
) -> Result<(), ReplayError> {
    let now = ta.at_ms;
    let wrap = |source| ReplayError::Action { step, source };
    match &ta.action {
        ScriptAction::Start => run.start(now).map_err(wrap)?,
        ScriptAction::Utter { text } => {
            run.utterance(text, lexicon, now).map_err(wrap)?;
        }
        ScriptAction::Ray { origin, direction } => {
            let ray = Ray::new(*origin, *direction).ok_or(wrap(ActionError::InvalidRay))?;
            run.ray(&ray, now).map_err(wrap)?;
        }
        ScriptAction::Minimap {
            origin,
            direction,
            half_angle,
        } => {
            run.open_minimap(*origin, *direction, *half_angle, now)
                .map_err(wrap)?;
        }
        ScriptAction::Pick { point } => {
            run.map_pick(*point, now).map_err(wrap)?;
        }
        ScriptAction::Confirm => {
            run.confirm(now).map_err(wrap)?;
        }
        ScriptAction::Abort => run.abort(now).map_err(wrap)?,
        ScriptAction::Next => return Err(desync(step, "`next` inside a single trial")),
    }
    Ok(())
}

/// Runs one trial's actions (no `Next`) and returns its record.
pub fn run_trial(
    spec: &TrialSpec,
    actions: &[TimedAction],
    lexicon: &Lexicon,
) -> Result<TrialRecord, ReplayError> {
    let mut run = TrialRun::new(spec.clone())?;
    for (step, ta) in actions.iter().enumerate() {
        apply(&mut run, step, ta, lexicon)?;
    }
    run.record()
        .ok_or_else(|| desync(actions.len(), "script ended before the trial finished"))
}

/// Replays a whole session script against a plan. Records come back in plan
/// order, one per trial the script finished.
pub fn replay_script(
    script: &[TimedAction],
    plan: &StudyPlan,
    lexicon: &Lexicon,
) -> Result<Vec<TrialRecord>, ReplayError> {
    let mut records = Vec::new();
    let mut cursor = 0usize;
    let mut current: Option<TrialRun> = None;
    let mut last_ms = 0u64;
    for (step, ta) in script.iter().enumerate() {
        if ta.at_ms < last_ms {
            return Err(desync(step, "timestamps go backwards"));
        }
        last_ms = ta.at_ms;
        if ta.action == ScriptAction::Next {
            let run = current
                .take()
                .ok_or_else(|| desync(step, "`next` before the trial started"))?;
            let record = run
                .record()
                .ok_or_else(|| desync(step, "`next` while the trial is still running"))?;
            records.push(record);
            cursor += 1;
            continue;
        }
        if current.is_none() {
            let spec = plan
                .specs
                .get(cursor)
                .ok_or_else(|| desync(step, "script runs past the end of the plan"))?;
            current = Some(TrialRun::new(spec.clone())?);
        }
        let run = current.as_mut().expect("set above");
        if run.is_finished() {
            return Err(desync(step, "action after the trial finished"));
        }
        apply(run, step, ta, lexicon)?;
    }
    if let Some(record) = current.and_then(|r| r.record()) {
        records.push(record);
    }
    Ok(records)
}

fn plural(shape: ShapeKind) -> String {
    let name = shape.name();
    if name.ends_with('s') || name.ends_with('x') {
        format!("{name}es")
    } else {
        format!("{name}s")
    }
}

/// Utterance naming exactly the target pair, checked against the lexicon.
fn target_utterance(
    shape: ShapeKind,
    color: ColorKind,
    many: bool,
    rng: &mut ChaCha8Rng,
    lexicon: &Lexicon,
) -> Option<String> {
    const TEMPLATES: [&str; 4] = ["select the", "select all", "pick the", "choose"];
    let lead = TEMPLATES[rng.random_range(0..TEMPLATES.len())];
    let noun = if many { plural(shape) } else { String::from(shape.name()) };
    let text = format!("{lead} {} {noun}", color.name());
    let cmd = interpret(&text, lexicon).ok()?;
    (cmd.intent.intent == Intent::Select && cmd.color() == Some(color) && cmd.shape() == Some(shape))
        .then_some(text)
}

/// A ray from the viewpoint to `o` if nothing is in the way.
fn clear_ray(run: &TrialRun, o: &SceneObject) -> Option<Ray> {
    let ray = Ray::towards(VIEWPOINT, o.position)?;
    let hit = raycast(&run.arena().scene, &ray).hit?;
    (hit.id == o.id).then_some(ray)
}

/// Narrowing cone half-angles tried when a minimap cannot fit its rim.
const HALF_ANGLES: [f64; 5] = [0.35, 0.2, 0.1, 0.05, 0.02];

/// Picks the minimap half-angle and icon position that select `id`.
fn minimap_pick(run: &TrialRun, target: &SceneObject) -> Option<(Option<f64>, Vec2)> {
    let direction = target.position - VIEWPOINT;
    for (k, &half) in HALF_ANGLES.iter().enumerate() {
        let mut cfg = MinimapConfig::aimed(VIEWPOINT, direction);
        cfg.cone_half_angle = half;
        let Ok(layout) = project(&run.arena().scene, &cfg).and_then(|l| expand_overlaps(&l, &cfg))
        else {
            continue;
        };
        if let Some(icon) = layout.icon(target.id) {
            let arg = if k == 0 { None } else { Some(half) };
            return Some((arg, icon.map_position));
        }
    }
    None
}

struct Driver<'a> {
    lexicon: &'a Lexicon,
    rng: ChaCha8Rng,
    now: u64,
    out: Vec<TimedAction>,
}

impl Driver<'_> {
    fn wait(&mut self, lo: u64, hi: u64) {
        self.now += self.rng.random_range(lo..hi);
    }

    fn act(&mut self, run: &mut TrialRun, action: ScriptAction) -> Result<(), ReplayError> {
        let ta = TimedAction {
            at_ms: self.now,
            action,
        };
        apply(run, self.out.len(), &ta, self.lexicon)?;
        self.out.push(ta);
        Ok(())
    }

    fn toggle_target(&mut self, run: &mut TrialRun, target: &SceneObject) -> Result<(), ReplayError> {
        if let Some((half_angle, point)) = minimap_pick(run, target) {
            self.wait(900, 2_200);
            self.act(
                run,
                ScriptAction::Minimap {
                    origin: VIEWPOINT,
                    direction: target.position - VIEWPOINT,
                    half_angle,
                },
            )?;
            self.wait(600, 1_800);
            return self.act(run, ScriptAction::Pick { point });
        }
        let ray = clear_ray(run, target)
            .ok_or_else(|| desync(self.out.len(), "target unreachable by minimap and ray"))?;
        self.wait(1_000, 2_500);
        self.act(
            run,
            ScriptAction::Ray {
                origin: ray.origin,
                direction: ray.direction,
            },
        )
    }

    fn play(&mut self, spec: &TrialSpec) -> Result<(), ReplayError> {
        let mut run = TrialRun::new(spec.clone())?;
        self.wait(400, 1_200);
        self.act(&mut run, ScriptAction::Start)?;
        self.now += COUNTDOWN_MS;
        let targets: Vec<SceneObject> = run.arena().scene.targets().cloned().collect();
        let (shape, color) = spec.target_pair;

        // An occasional hasty confirm before anything is selected.
        if self.rng.random_bool(0.1) {
            self.wait(500, 1_500);
            self.act(&mut run, ScriptAction::Confirm)?;
        }
        match spec.technique {
            Technique::AssistVR => {
                // A single visible target is sometimes just pointed at.
                let ray = match targets.as_slice() {
                    [only] if self.rng.random_bool(0.3) => clear_ray(&run, only),
                    _ => None,
                };
                if let Some(ray) = ray {
                    self.wait(1_200, 2_500);
                    self.act(
                        &mut run,
                        ScriptAction::Ray {
                            origin: ray.origin,
                            direction: ray.direction,
                        },
                    )?;
                } else {
                    if self.rng.random_bool(0.05) {
                        self.wait(800, 1_500);
                        self.act(&mut run, ScriptAction::Utter { text: String::from("um where is it") })?;
                    }
                    let many = targets.len() > 1;
                    let text = target_utterance(shape, color, many, &mut self.rng, self.lexicon)
                        .or_else(|| target_utterance(shape, color, false, &mut self.rng, self.lexicon));
                    match text {
                        Some(text) => {
                            self.wait(1_500, 3_000);
                            self.act(&mut run, ScriptAction::Utter { text })?;
                        }
                        None => {
                            for t in &targets {
                                self.toggle_target(&mut run, t)?;
                            }
                        }
                    }
                }
            }
            Technique::DiscPIM => {
                for t in &targets {
                    self.toggle_target(&mut run, t)?;
                }
            }
        }
        self.wait(400, 1_200);
        self.act(&mut run, ScriptAction::Confirm)?;
        if run.phase() != TrialPhase::Completed {
            return Err(desync(self.out.len(), "scripted selection was not correct"));
        }
        debug_assert_eq!(
            run.arena().selection.selected_set(),
            targets.iter().map(|o| o.id).collect::<alloc::collections::BTreeSet<ObjectId>>()
        );
        self.wait(500, 1_500);
        self.out.push(TimedAction {
            at_ms: self.now,
            action: ScriptAction::Next,
        });
        Ok(())
    }
}

/// A deterministic simulated participant that completes every trial of
/// `plan`. Speech trials name the target (or point at a lone visible one);
/// minimap trials aim at each target and pick its icon. Timing is random but
/// fixed by `seed`.
pub fn scripted_participant(
    plan: &StudyPlan,
    lexicon: &Lexicon,
    seed: u64,
) -> Result<Vec<TimedAction>, ReplayError> {
    let mut driver = Driver {
        lexicon,
        rng: rng::stream(seed, &[u64::from(plan.participant), u64::from(plan.order_index)]),
        now: 0,
        out: Vec::new(),
    };
    for spec in &plan.specs {
        driver.play(spec)?;
    }
    Ok(driver.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::{build_plan, TrialOutcome};

    #[test]
    fn short_script_replays() {
        let lex = Lexicon::builtin();
        let plan = build_plan(3, 0).unwrap();
        let mut script = scripted_participant(&plan, &lex, 11).unwrap();
        // Keep the first two trials only.
        let cut = script
            .iter()
            .enumerate()
            .filter(|(_, a)| a.action == ScriptAction::Next)
            .nth(1)
            .unwrap()
            .0;
        script.truncate(cut + 1);
        let records = replay_script(&script, &plan, &lex).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.iter().all(|r| r.outcome == TrialOutcome::Completed));
        assert_eq!(records[0].scene_digest, records[1].scene_digest);
    }

    #[test]
    fn action_before_start_desyncs() {
        let lex = Lexicon::builtin();
        let plan = build_plan(0, 0).unwrap();
        let script = [TimedAction {
            at_ms: 10,
            action: ScriptAction::Confirm,
        }];
        assert!(matches!(
            replay_script(&script, &plan, &lex),
            Err(ReplayError::Action { step: 0, .. })
        ));
        let script = [TimedAction {
            at_ms: 10,
            action: ScriptAction::Next,
        }];
        assert!(matches!(
            replay_script(&script, &plan, &lex),
            Err(ReplayError::ScriptDesync { step: 0, .. })
        ));
    }

    #[test]
    fn single_trial_helper() {
        let lex = Lexicon::builtin();
        let spec = build_plan(0, 0).unwrap().specs[0].clone();
        let (shape, color) = spec.target_pair;
        let actions = [
            TimedAction { at_ms: 0, action: ScriptAction::Start },
            TimedAction {
                at_ms: 4_000,
                action: ScriptAction::Utter {
                    text: format!("select the {} {}", color.name(), shape.name()),
                },
            },
            TimedAction { at_ms: 5_000, action: ScriptAction::Confirm },
        ];
        let rec = run_trial(&spec, &actions, &lex).unwrap();
        assert_eq!(rec.completion_ms, 2_000);
        assert!(run_trial(&spec, &actions[..2], &lex).is_err());
    }

    #[test]
    fn plural_forms_fold_back() {
        let lex = Lexicon::builtin();
        for &shape in ShapeKind::ALL {
            let text = format!("select all {}", plural(shape));
            assert_eq!(interpret(&text, &lex).unwrap().shape(), Some(shape), "{text}");
        }
    }
}
