//! Append-only trial record logs and the summary table.
//!
//! A log is JSON lines. Each finished trial is one `record` header line
//! followed by one `event` line per selection event:
//!
//! ```text
//! {"kind":"record","v":1,"spec":{...},"completion_ms":2210,"attempts":1,...,"event_count":2}
//! {"kind":"event","v":1,"at_ms":5012,"kind_of":"SpeechSelect","ids":[120],"text":"select the red cube"}
//! ```

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, LineWriter, Write};
use std::path::Path;

use assistvr_core::selection::{SelectionEvent, SelectionEventKind};
use assistvr_core::trial::{ConditionSummary, TrialOutcome, TrialRecord, TrialSpec};
use assistvr_core::{ObjectId, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("log line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct RecordHeader {
    v: u32,
    spec: TrialSpec,
    completion_ms: u64,
    attempts: u32,
    started_ms: u64,
    active_ms: u64,
    outcome: TrialOutcome,
    scene_digest: u64,
    event_count: usize,
}

/// Event lines rename the event's own kind so it does not collide with the
/// line tag.
#[derive(Serialize, Deserialize)]
struct EventLine {
    v: u32,
    at_ms: u64,
    kind_of: SelectionEventKind,
    ids: Vec<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Record(RecordHeader),
    Event(EventLine),
}

/// The lines for one record, newline-terminated.
pub fn record_lines(r: &TrialRecord) -> String {
    let header = Line::Record(RecordHeader {
        v: SCHEMA_VERSION,
        spec: r.spec.clone(),
        completion_ms: r.completion_ms,
        attempts: r.attempts,
        started_ms: r.started_ms,
        active_ms: r.active_ms,
        outcome: r.outcome,
        scene_digest: r.scene_digest,
        event_count: r.events.len(),
    });
    let mut out = serde_json::to_string(&header).expect("record serializes");
    out.push('\n');
    for e in &r.events {
        let line = Line::Event(EventLine {
            v: SCHEMA_VERSION,
            at_ms: e.at_ms,
            kind_of: e.kind,
            ids: e.ids.clone(),
            text: e.text.clone(),
        });
        out.push_str(&serde_json::to_string(&line).expect("event serializes"));
        out.push('\n');
    }
    out
}

/// Whole log text for a list of records.
pub fn log_text(records: &[TrialRecord]) -> String {
    records.iter().map(record_lines).collect()
}

/// Appends records to a file, flushing after every line.
pub struct RecordLog {
    out: LineWriter<File>,
}

impl RecordLog {
    pub fn open_append(path: &Path) -> io::Result<RecordLog> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordLog {
            out: LineWriter::new(file),
        })
    }

    pub fn append(&mut self, r: &TrialRecord) -> io::Result<()> {
        self.out.write_all(record_lines(r).as_bytes())?;
        self.out.flush()
    }
}

pub fn read_records(reader: impl BufRead) -> Result<Vec<TrialRecord>, LogError> {
    let mut records: Vec<TrialRecord> = Vec::new();
    let mut pending = 0usize;
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| LogError::Parse {
            line: line_no,
            message,
        };
        let parsed: Line = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        match parsed {
            Line::Record(h) => {
                if pending != 0 {
                    return Err(parse_err(format!("previous record is missing {pending} events")));
                }
                if h.v != SCHEMA_VERSION {
                    return Err(parse_err(format!("unsupported schema version {}", h.v)));
                }
                pending = h.event_count;
                records.push(TrialRecord {
                    spec: h.spec,
                    completion_ms: h.completion_ms,
                    attempts: h.attempts,
                    started_ms: h.started_ms,
                    active_ms: h.active_ms,
                    events: Vec::with_capacity(h.event_count),
                    outcome: h.outcome,
                    scene_digest: h.scene_digest,
                    scene_text: String::new(),
                });
            }
            Line::Event(e) => {
                let Some(r) = records.last_mut().filter(|_| pending > 0) else {
                    return Err(parse_err("event line outside a record".into()));
                };
                r.events.push(SelectionEvent {
                    at_ms: e.at_ms,
                    kind: e.kind_of,
                    ids: e.ids,
                    text: e.text,
                });
                pending -= 1;
            }
        }
    }
    if pending != 0 {
        return Err(LogError::Parse {
            line: last_line,
            message: format!("log ends {pending} events short"),
        });
    }
    Ok(records)
}

pub fn read_records_file(path: &Path) -> Result<Vec<TrialRecord>, LogError> {
    read_records(io::BufReader::new(File::open(path)?))
}

pub const SUMMARY_HEADER: &str = "technique,perplexity,num_targets,phase,n,mean_ms,sd_ms,ci95_ms,removed";

pub fn summary_csv(rows: &[ConditionSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in rows {
        let k = &s.key;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3},{:.3},{:.3},{}",
            k.technique,
            k.perplexity.token(),
            k.num_targets.count(),
            k.phase,
            s.n,
            s.mean_ms,
            s.sd_ms,
            s.ci95_halfwidth_ms,
            s.removed_outliers
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use assistvr_core::nlu::Lexicon;
    use assistvr_core::trial::{build_plan, replay_script, scripted_participant, summarize};

    fn some_records() -> Vec<TrialRecord> {
        let lex = Lexicon::builtin();
        let mut plan = build_plan(2, 1).unwrap();
        plan.specs.truncate(6);
        let script = scripted_participant(&plan, &lex, 5).unwrap();
        replay_script(&script, &plan, &lex).unwrap()
    }

    #[test]
    fn log_round_trip() {
        let records = some_records();
        let text = log_text(&records);
        assert!(text.lines().all(|l| l.contains("\"v\":1")));
        let back = read_records(text.as_bytes()).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            assert_eq!(a.spec, b.spec);
            assert_eq!(a.events, b.events);
            assert_eq!(a.scene_digest, b.scene_digest);
        }
        assert_eq!(log_text(&back), text);
    }

    #[test]
    fn truncated_log_is_an_error() {
        let text = log_text(&some_records());
        let cut: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_records(cut.as_bytes()), Err(LogError::Parse { .. })));
    }

    #[test]
    fn csv_has_fixed_columns() {
        let records = some_records();
        let csv = summary_csv(&summarize(&records, &[]));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SUMMARY_HEADER));
        for l in lines {
            assert_eq!(l.split(',').count(), 9);
        }
    }
}
