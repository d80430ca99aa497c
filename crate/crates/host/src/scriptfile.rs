//! Session scripts on disk: a header line naming the plan, then one timed
//! action per line.
//!
//! ```text
//! {"v":1,"participant":3,"order_index":3,"seed":42}
//! {"at_ms":812,"action":"start"}
//! {"at_ms":5530,"action":"utter","text":"select the blue cube"}
//! {"at_ms":6400,"action":"confirm"}
//! {"at_ms":7250,"action":"next"}
//! ```

use std::io::{self, BufRead, Write};

use assistvr_core::trial::{build_plan, PlanError, StudyPlan, TimedAction};
use assistvr_core::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptHeader {
    pub v: u32,
    pub participant: u32,
    pub order_index: u32,
    /// Seed the script was generated from; informational.
    #[serde(default)]
    pub seed: u64,
}

impl ScriptHeader {
    pub fn new(participant: u32, order_index: u32, seed: u64) -> ScriptHeader {
        ScriptHeader {
            v: SCHEMA_VERSION,
            participant,
            order_index,
            seed,
        }
    }

    pub fn plan(&self) -> Result<StudyPlan, PlanError> {
        build_plan(self.participant, self.order_index)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("script line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("script is empty")]
    Empty,
}

pub fn write_script(
    mut out: impl Write,
    header: &ScriptHeader,
    actions: &[TimedAction],
) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string(header)?)?;
    for a in actions {
        writeln!(out, "{}", serde_json::to_string(a)?)?;
    }
    out.flush()
}

pub fn read_script(reader: impl BufRead) -> Result<(ScriptHeader, Vec<TimedAction>), ScriptFileError> {
    let mut header = None;
    let mut actions = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |e: serde_json::Error| ScriptFileError::Parse {
            line: i + 1,
            message: e.to_string(),
        };
        if header.is_none() {
            let h: ScriptHeader = serde_json::from_str(&line).map_err(err)?;
            if h.v != SCHEMA_VERSION {
                return Err(ScriptFileError::Parse {
                    line: i + 1,
                    message: format!("unsupported schema version {}", h.v),
                });
            }
            header = Some(h);
        } else {
            actions.push(serde_json::from_str(&line).map_err(err)?);
        }
    }
    Ok((header.ok_or(ScriptFileError::Empty)?, actions))
}
