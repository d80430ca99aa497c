//! Line-oriented session driver behind `assistvr run`.

use std::io::{self, BufRead, Write};

use assistvr_core::scene::VIEWPOINT;
use assistvr_core::session::{Command, Session, SessionError, StateDelta, Tone, TrialVerb};
use assistvr_core::trial::TrialPhase;
use assistvr_core::{Vec2, Vec3};

use crate::records::RecordLog;

pub const HELP: &str = "\
commands:
  start | confirm | abort | next     trial control
  say <words...>                     speech command (AssistVR)
  ray <dx> <dy> <dz>                 ray from the viewpoint
  minimap <dx> <dy> <dz> [half]      open the minimap aimed along a direction (DiscPIM)
  pick <x> <y>                       pick on the open minimap (DiscPIM)
  scene                              print the scene
  status                             print the current state
  help | quit";

fn numbers(args: &[&str]) -> Option<Vec<f64>> {
    args.iter().map(|a| a.parse().ok()).collect()
}

/// Parses one input line. `Ok(None)` for lines handled without a command.
pub fn parse_line(line: &str) -> Result<Option<Command>, String> {
    let mut words = line.split_whitespace();
    let Some(head) = words.next() else {
        return Ok(None);
    };
    let rest: Vec<&str> = words.collect();
    let cmd = match head {
        "start" => Command::Trial { verb: TrialVerb::Start },
        "confirm" => Command::Trial { verb: TrialVerb::Confirm },
        "abort" => Command::Trial { verb: TrialVerb::Abort },
        "next" => Command::Trial { verb: TrialVerb::Next },
        "say" => Command::Utterance { text: rest.join(" ") },
        "ray" => match numbers(&rest).as_deref() {
            Some(&[x, y, z]) => Command::Ray {
                origin: VIEWPOINT,
                direction: Vec3::new(x, y, z),
            },
            _ => return Err("usage: ray <dx> <dy> <dz>".into()),
        },
        "minimap" => match numbers(&rest).as_deref() {
            Some(&[x, y, z]) => Command::OpenMinimap {
                origin: VIEWPOINT,
                direction: Vec3::new(x, y, z),
                half_angle: None,
            },
            Some(&[x, y, z, h]) => Command::OpenMinimap {
                origin: VIEWPOINT,
                direction: Vec3::new(x, y, z),
                half_angle: Some(h),
            },
            _ => return Err("usage: minimap <dx> <dy> <dz> [half_angle]".into()),
        },
        "pick" => match numbers(&rest).as_deref() {
            Some(&[x, y]) => Command::MapPick { point: Vec2::new(x, y) },
            _ => return Err("usage: pick <x> <y>".into()),
        },
        other => return Err(format!("unknown command `{other}` (try `help`)")),
    };
    Ok(Some(cmd))
}

fn phase_name(p: TrialPhase) -> String {
    match p {
        TrialPhase::Ready => "ready".into(),
        TrialPhase::Countdown { .. } => "countdown".into(),
        TrialPhase::Active => "active".into(),
        TrialPhase::Completed => "completed".into(),
        TrialPhase::Aborted => "aborted".into(),
    }
}

/// One-line human summary of a delta.
pub fn describe(d: &StateDelta) -> String {
    let mut parts = vec![format!("#{} {}", d.seq, phase_name(d.phase))];
    if let (Some(i), Some(n)) = (d.trial_index, d.trial_count) {
        parts.push(format!("trial {i}/{n}"));
    }
    if d.countdown_remaining_ms > 0 {
        parts.push(format!("countdown {} ms", d.countdown_remaining_ms));
    }
    let added: Vec<String> = d.changed.iter().filter(|c| c.selected).map(|c| format!("+{}", c.id.0)).collect();
    let removed: Vec<String> = d.changed.iter().filter(|c| !c.selected).map(|c| format!("-{}", c.id.0)).collect();
    if !added.is_empty() || !removed.is_empty() {
        parts.push([added, removed].concat().join(" "));
    }
    parts.push(format!("panel \"{}\" ({} selected)", d.panel.recognized_text, d.panel.entries.len()));
    if let Some(t) = d.tone {
        parts.push(match t {
            Tone::Correct => "tone: correct".into(),
            Tone::Incorrect => format!("tone: try again (attempt {})", d.attempts),
        });
    }
    if let Some(m) = &d.minimap {
        parts.push(format!("minimap {} icons", m.icons.len()));
    }
    if d.scene_changed {
        parts.push("new scene".into());
    }
    if let Some(n) = &d.notice {
        parts.push(format!("notice: {n}"));
    }
    parts.join(" | ")
}

/// Runs commands from `input` until EOF or `quit`, appending finished trials
/// to `log`.
pub fn run(
    session: &mut Session,
    input: impl BufRead,
    mut out: impl Write,
    mut now_ms: impl FnMut() -> u64,
    mut log: Option<&mut RecordLog>,
) -> io::Result<()> {
    writeln!(out, "{}", describe(&session.snapshot(now_ms())))?;
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        match trimmed {
            "quit" | "exit" => break,
            "help" => {
                writeln!(out, "{HELP}")?;
                continue;
            }
            "scene" => {
                write!(out, "{}", session.scene().to_text())?;
                continue;
            }
            "status" => {
                writeln!(out, "{}", describe(&session.snapshot(now_ms())))?;
                continue;
            }
            _ => {}
        }
        let cmd = match parse_line(trimmed) {
            Ok(Some(cmd)) => cmd,
            Ok(None) => continue,
            Err(msg) => {
                writeln!(out, "error: {msg}")?;
                continue;
            }
        };
        let t = now_ms();
        if let Some(d) = session.tick(t) {
            writeln!(out, "{}", describe(&d))?;
        }
        let logged = session.records().len();
        match session.apply(&cmd, t) {
            Ok(d) => writeln!(out, "{}", describe(&d))?,
            Err(e @ SessionError::Scene(_)) => return Err(io::Error::other(e)),
            Err(e) => writeln!(out, "error: {e}")?,
        }
        if let Some(log) = log.as_deref_mut() {
            for r in &session.records()[logged..] {
                log.append(r)?;
            }
        }
    }
    out.flush()
}
