//! Multimodal object selection engine.
//!
//! The crate turns spoken (transcribed) selection commands such as
//! "select all purple spheres" into selections over procedurally generated,
//! heavily occluded 3D scenes, and pairs them with raycast toggling. A
//! disc-minimap baseline and the search/repeat trial protocol used to compare
//! the two techniques live alongside.
//!
//! Everything here is `#![no_std]` with `alloc`: pure functions over owned
//! values, no IO and no clocks. Time enters as integer milliseconds supplied by
//! the caller, which is what makes scripted replays byte-for-byte reproducible.
//! File formats, logs, the CLI and the network service live in the `assistvr`
//! companion crate.

#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod geometry;
pub mod minimap;
pub mod nlu;
pub mod rng;
pub mod scene;
pub mod selection;
pub mod session;
pub mod trial;

pub use geometry::{Vec2, Vec3};
pub use minimap::{MinimapConfig, MinimapError, MinimapIcon, MinimapLayout};
pub use nlu::{
    CommandInterpretation, EntityKind, EntitySpan, Intent, IntentPrediction, Lexicon, NluError,
    TokenStream,
};
pub use scene::{
    ColorKind, ObjectId, PerplexityLevel, PickResult, Ray, Scene, SceneError, SceneObject,
    ShapeKind, TargetCount,
};
pub use selection::{ConfirmOutcome, PanelModel, SelectionEvent, SelectionEventKind, SelectionState};
pub use session::{
    apply_delta, Command, SelectionChange, Session, SessionError, SessionParams, StateDelta, Tone,
    TrialVerb, SCHEMA_VERSION,
};
pub use trial::{
    ConditionKey, ConditionSummary, Phase, StudyPlan, Technique, TrialOutcome, TrialRecord,
    TrialSpec,
};
