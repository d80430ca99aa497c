//! Study protocol: counterbalanced plans, the per-trial state machine, scripted
//! replays, and descriptive statistics over trial records.

mod plan;
mod run;
mod script;
mod stats;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scene::{generate_scene, ColorKind, PerplexityLevel, Scene, SceneError, ShapeKind, TargetCount};
use crate::selection::SelectionEvent;

pub use plan::{build_plan, PlanError, ORDER_COUNT, PLAN_LENGTH, SETS_PER_CONDITION};
pub use run::{ActionError, Arena, TrialPhase, TrialRun, COUNTDOWN_MS};
pub use script::{
    replay_script, run_trial, scripted_participant, ReplayError, ScriptAction, TimedAction,
};
pub use stats::{filter_outliers, summarize, ConditionKey, ConditionSummary, OutlierSplit, OUTLIER_SD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Technique {
    AssistVR,
    DiscPIM,
}

impl Technique {
    pub const ALL: [Technique; 2] = [Technique::AssistVR, Technique::DiscPIM];

    pub fn token(self) -> &'static str {
        match self {
            Technique::AssistVR => "assistvr",
            Technique::DiscPIM => "discpim",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technique::AssistVR => "AssistVR",
            Technique::DiscPIM => "DiscPIM",
        })
    }
}

impl FromStr for Technique {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Technique::ALL
            .into_iter()
            .find(|t| s.eq_ignore_ascii_case(t.token()))
            .ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Search,
    Repeat,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Search => "Search",
            Phase::Repeat => "Repeat",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub participant: u32,
    pub technique: Technique,
    pub perplexity: PerplexityLevel,
    pub num_targets: TargetCount,
    /// 1, 2 or 3.
    pub set_index: u8,
    pub phase: Phase,
    pub scene_seed: u64,
    pub target_pair: (ShapeKind, ColorKind),
}

impl TrialSpec {
    pub fn scene(&self) -> Result<Scene, SceneError> {
        generate_scene(
            self.perplexity,
            self.num_targets,
            self.scene_seed,
            Some(self.target_pair),
        )
    }

    pub fn condition(&self) -> ConditionKey {
        ConditionKey {
            technique: self.technique,
            perplexity: self.perplexity,
            num_targets: self.num_targets,
            phase: self.phase,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyPlan {
    pub participant: u32,
    pub order_index: u32,
    pub specs: Vec<TrialSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialOutcome {
    Completed,
    Aborted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub spec: TrialSpec,
    /// Countdown end to the correct confirm; 0 for aborted trials.
    pub completion_ms: u64,
    /// Confirms issued, counting the one in progress for aborted trials.
    pub attempts: u32,
    /// Session clock when the start command was accepted.
    pub started_ms: u64,
    /// Session clock when the countdown ended.
    pub active_ms: u64,
    pub events: Vec<SelectionEvent>,
    pub outcome: TrialOutcome,
    /// FNV-1a 64 of the scene serialization the trial ran on.
    pub scene_digest: u64,
    /// The scene serialization itself. Kept in memory only.
    #[serde(skip)]
    pub scene_text: String,
}

/// FNV-1a, 64 bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
