use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::{fnv1a64, Technique, TrialOutcome, TrialRecord, TrialSpec};
use crate::geometry::{Vec2, Vec3};
use crate::minimap::{expand_overlaps, pick_from_minimap, project, MinimapConfig, MinimapError, MinimapLayout};
use crate::nlu::{interpret, CommandInterpretation, Lexicon};
use crate::scene::{Ray, Scene, SceneError};
use crate::selection::{ConfirmOutcome, SelectionState, SpeechOutcome, ToggleOutcome};

/// Countdown between the start command and the trial becoming active.
pub const COUNTDOWN_MS: u64 = 3_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ActionError {
    #[error("`{action}` is not allowed while the trial is {phase:?}")]
    IllegalPhase { action: &'static str, phase: TrialPhase },
    #[error("`{action}` is not available with {technique}")]
    WrongTechnique { action: &'static str, technique: Technique },
    #[error("invalid ray: direction must be a finite nonzero vector")]
    InvalidRay,
    #[error("no minimap is open")]
    NoMinimap,
    #[error(transparent)]
    Minimap(#[from] MinimapError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// What a user is interacting with: a scene, their selection, and the
/// technique-specific tools.
#[derive(Clone, Debug)]
pub struct Arena {
    pub technique: Technique,
    pub scene: Scene,
    pub scene_text: String,
    pub selection: SelectionState,
    pub layout: Option<MinimapLayout>,
    pub last_command: Option<CommandInterpretation>,
}

impl Arena {
    pub fn new(technique: Technique, scene: Scene) -> Arena {
        let scene_text = scene.to_text();
        Arena {
            technique,
            scene,
            scene_text,
            selection: SelectionState::new(),
            layout: None,
            last_command: None,
        }
    }

    /// Speech path; not offered by the minimap technique.
    pub fn utterance(
        &mut self,
        text: &str,
        lexicon: &Lexicon,
        at_ms: u64,
    ) -> Result<(SpeechOutcome, Option<String>), ActionError> {
        if self.technique != Technique::AssistVR {
            return Err(ActionError::WrongTechnique {
                action: "utterance",
                technique: self.technique,
            });
        }
        let parsed = interpret(text, lexicon);
        let outcome = self.selection.apply_parse(&self.scene, &parsed, at_ms);
        let notice = match parsed {
            Ok(cmd) => {
                self.last_command = Some(cmd);
                None
            }
            Err(e) => Some(alloc::format!("{e}")),
        };
        Ok((outcome, notice))
    }

    pub fn ray(&mut self, ray: &Ray, at_ms: u64) -> Result<Option<ToggleOutcome>, ActionError> {
        let ray = Ray::new(ray.origin, ray.direction).ok_or(ActionError::InvalidRay)?;
        Ok(self.selection.apply_ray(&self.scene, &ray, at_ms))
    }

    /// Generates (and freezes) the minimap for an aiming pose.
    pub fn open_minimap(
        &mut self,
        origin: Vec3,
        direction: Vec3,
        half_angle: Option<f64>,
    ) -> Result<&MinimapLayout, ActionError> {
        if self.technique != Technique::DiscPIM {
            return Err(ActionError::WrongTechnique {
                action: "minimap",
                technique: self.technique,
            });
        }
        let mut cfg = MinimapConfig::aimed(origin, direction);
        if let Some(a) = half_angle {
            cfg.cone_half_angle = a;
        }
        let layout = expand_overlaps(&project(&self.scene, &cfg)?, &cfg)?;
        Ok(self.layout.insert(layout))
    }

    pub fn map_pick(&mut self, point: Vec2, at_ms: u64) -> Result<Option<ToggleOutcome>, ActionError> {
        if self.technique != Technique::DiscPIM {
            return Err(ActionError::WrongTechnique {
                action: "map-pick",
                technique: self.technique,
            });
        }
        let layout = self.layout.as_ref().ok_or(ActionError::NoMinimap)?;
        Ok(pick_from_minimap(layout, point).map(|id| self.selection.toggle(id, at_ms)))
    }

    pub fn confirm(&mut self, at_ms: u64) -> ConfirmOutcome {
        self.selection.confirm(&self.scene, at_ms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TrialPhase {
    Ready,
    Countdown { ends_at_ms: u64 },
    Active,
    Completed,
    Aborted,
}

/// One search or repeat trial:
/// Ready -> Countdown (3 s) -> Active -> Completed, with Aborted reachable
/// from any unfinished phase. An incorrect confirm keeps the trial active and
/// counts another attempt.
#[derive(Clone, Debug)]
pub struct TrialRun {
    spec: TrialSpec,
    arena: Arena,
    phase: TrialPhase,
    attempts: u32,
    started_ms: u64,
    active_ms: u64,
    completion_ms: u64,
}

impl TrialRun {
    pub fn new(spec: TrialSpec) -> Result<TrialRun, SceneError> {
        let scene = spec.scene()?;
        Ok(TrialRun {
            arena: Arena::new(spec.technique, scene),
            spec,
            phase: TrialPhase::Ready,
            attempts: 1,
            started_ms: 0,
            active_ms: 0,
            completion_ms: 0,
        })
    }

    pub fn spec(&self) -> &TrialSpec {
        &self.spec
    }

    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn phase(&self) -> TrialPhase {
        self.phase
    }

    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, TrialPhase::Completed | TrialPhase::Aborted)
    }

    pub fn countdown_remaining(&self, now_ms: u64) -> u64 {
        match self.phase {
            TrialPhase::Countdown { ends_at_ms } => ends_at_ms.saturating_sub(now_ms),
            _ => 0,
        }
    }

    /// Moves Countdown to Active once the clock passes its end. Returns true
    /// when the phase changed.
    pub fn advance(&mut self, now_ms: u64) -> bool {
        if let TrialPhase::Countdown { ends_at_ms } = self.phase {
            if now_ms >= ends_at_ms {
                self.phase = TrialPhase::Active;
                self.active_ms = ends_at_ms;
                return true;
            }
        }
        false
    }

    pub fn start(&mut self, now_ms: u64) -> Result<(), ActionError> {
        if self.phase != TrialPhase::Ready {
            return Err(self.illegal("start"));
        }
        self.started_ms = now_ms;
        self.phase = TrialPhase::Countdown {
            ends_at_ms: now_ms + COUNTDOWN_MS,
        };
        Ok(())
    }

    fn illegal(&self, action: &'static str) -> ActionError {
        ActionError::IllegalPhase {
            action,
            phase: self.phase,
        }
    }

    fn active(&mut self, action: &'static str, now_ms: u64) -> Result<&mut Arena, ActionError> {
        self.advance(now_ms);
        if self.phase != TrialPhase::Active {
            return Err(self.illegal(action));
        }
        Ok(&mut self.arena)
    }

    pub fn utterance(
        &mut self,
        text: &str,
        lexicon: &Lexicon,
        now_ms: u64,
    ) -> Result<(SpeechOutcome, Option<String>), ActionError> {
        self.active("utterance", now_ms)?.utterance(text, lexicon, now_ms)
    }

    pub fn ray(&mut self, ray: &Ray, now_ms: u64) -> Result<Option<ToggleOutcome>, ActionError> {
        self.active("ray", now_ms)?.ray(ray, now_ms)
    }

    pub fn open_minimap(
        &mut self,
        origin: Vec3,
        direction: Vec3,
        half_angle: Option<f64>,
        now_ms: u64,
    ) -> Result<&MinimapLayout, ActionError> {
        self.active("minimap", now_ms)?
            .open_minimap(origin, direction, half_angle)
    }

    pub fn map_pick(&mut self, point: Vec2, now_ms: u64) -> Result<Option<ToggleOutcome>, ActionError> {
        self.active("map-pick", now_ms)?.map_pick(point, now_ms)
    }

    pub fn confirm(&mut self, now_ms: u64) -> Result<ConfirmOutcome, ActionError> {
        let outcome = self.active("confirm", now_ms)?.confirm(now_ms);
        match outcome {
            ConfirmOutcome::Correct => {
                self.completion_ms = now_ms - self.active_ms;
                self.phase = TrialPhase::Completed;
            }
            ConfirmOutcome::Incorrect => self.attempts += 1,
        }
        Ok(outcome)
    }

    pub fn abort(&mut self, now_ms: u64) -> Result<(), ActionError> {
        self.advance(now_ms);
        if self.is_finished() {
            return Err(self.illegal("abort"));
        }
        self.phase = TrialPhase::Aborted;
        Ok(())
    }

    /// The finished trial's record, or `None` while it is still running.
    pub fn record(&self) -> Option<TrialRecord> {
        let outcome = match self.phase {
            TrialPhase::Completed => TrialOutcome::Completed,
            TrialPhase::Aborted => TrialOutcome::Aborted,
            _ => return None,
        };
        Some(TrialRecord {
            spec: self.spec.clone(),
            completion_ms: self.completion_ms,
            attempts: self.attempts,
            started_ms: self.started_ms,
            active_ms: self.active_ms,
            events: self.arena.selection.events().to_vec(),
            outcome,
            scene_digest: fnv1a64(self.arena.scene_text.as_bytes()),
            scene_text: self.arena.scene_text.clone(),
        })
    }
}
