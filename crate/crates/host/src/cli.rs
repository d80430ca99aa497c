use std::fs::File;
use std::io::{self, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use assistvr_core::nlu::Lexicon;
use assistvr_core::scene::generate_scene;
use assistvr_core::session::{Session, SessionParams};
use assistvr_core::trial::{build_plan, filter_outliers, replay_script, scripted_participant, summarize};
use assistvr_core::{PerplexityLevel, TargetCount};
use clap::{Parser, Subcommand};

use crate::records::{log_text, read_records_file, summary_csv, RecordLog};
use crate::scriptfile::{read_script, write_script, ScriptHeader};
use crate::service::{self, AppState, Clock};

#[derive(Parser, Debug)]
#[command(name = "assistvr", version, about = "Speech and raycast object selection: study harness and service")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print a participant's 108-trial plan, one JSON spec per line.
    Plan {
        #[arg(long)]
        participant: u32,
        #[arg(long)]
        order: u32,
    },
    /// Generate a scripted participant's session script.
    Script {
        #[arg(long)]
        participant: u32,
        #[arg(long)]
        order: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a session script and write its record log.
    Replay {
        script: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Output log; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a live session from stdin.
    Run {
        #[arg(long, default_value_t = 0)]
        participant: u32,
        #[arg(long, default_value_t = 0)]
        order: u32,
        /// Untimed free play on a Medium scene instead of the plan.
        #[arg(long)]
        practice: bool,
        /// Technique for practice mode.
        #[arg(long, default_value = "assistvr")]
        technique: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Append finished trials here.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Split record logs into kept and removed (beyond 4 sd) records.
    Filter {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        kept: PathBuf,
        #[arg(long)]
        removed: PathBuf,
    },
    /// Per-condition completion time table (CSV) from record logs.
    Summarize {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Apply the outlier filter first.
        #[arg(long)]
        filter: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP and websocket API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Lexicon utilities.
    Lexicon {
        #[command(subcommand)]
        action: LexiconCmd,
    },
    /// Scene utilities.
    Scene {
        #[command(subcommand)]
        action: SceneCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum LexiconCmd {
    /// Print the built-in lexicon table.
    Dump,
    /// Validate a lexicon table file.
    Check { path: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum SceneCmd {
    /// Print a generated scene in text form.
    Dump {
        #[arg(long)]
        level: String,
        #[arg(long, default_value_t = 1)]
        targets: usize,
        #[arg(long)]
        seed: u64,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

pub fn load_lexicon(path: Option<&Path>) -> Result<Lexicon> {
    match path {
        None => Ok(Lexicon::builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Lexicon::from_table(&text).with_context(|| format!("loading lexicon {}", p.display()))
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_logs(paths: &[PathBuf]) -> Result<Vec<assistvr_core::TrialRecord>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_records_file(p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(all)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Plan { participant, order } => {
            let plan = build_plan(participant, order)?;
            let mut out = io::stdout().lock();
            for spec in &plan.specs {
                writeln!(out, "{}", serde_json::to_string(spec)?)?;
            }
        }
        Cmd::Script {
            participant,
            order,
            seed,
            lexicon,
            out,
        } => {
            let lex = load_lexicon(lexicon.as_deref())?;
            let plan = build_plan(participant, order)?;
            let actions = scripted_participant(&plan, &lex, seed)?;
            write_script(output(out.as_deref())?, &ScriptHeader::new(participant, order, seed), &actions)?;
        }
        Cmd::Replay { script, lexicon, out } => {
            let lex = load_lexicon(lexicon.as_deref())?;
            let file = File::open(&script).with_context(|| format!("opening {}", script.display()))?;
            let (header, actions) = read_script(BufReader::new(file))?;
            let records = replay_script(&actions, &header.plan()?, &lex)?;
            output(out.as_deref())?.write_all(log_text(&records).as_bytes())?;
            eprintln!("{} records", records.len());
        }
        Cmd::Run {
            participant,
            order,
            practice,
            technique,
            seed,
            lexicon,
            records,
        } => {
            let lex = Arc::new(load_lexicon(lexicon.as_deref())?);
            let params = if practice {
                SessionParams::AdHoc {
                    technique,
                    perplexity: "medium".into(),
                    num_targets: 1,
                    seed,
                    target: None,
                }
            } else {
                SessionParams::Plan {
                    participant,
                    order_index: order,
                }
            };
            let mut session = Session::new(1, &params, lex)?;
            let mut log = records.as_deref().map(RecordLog::open_append).transpose()?;
            let start = Instant::now();
            eprintln!("type `help` for commands");
            crate::interactive::run(
                &mut session,
                io::stdin().lock(),
                io::stdout().lock(),
                || start.elapsed().as_millis() as u64,
                log.as_mut(),
            )?;
        }
        Cmd::Filter { logs, kept, removed } => {
            let records = read_logs(&logs)?;
            let split = filter_outliers(&records);
            std::fs::write(&kept, log_text(&split.kept))?;
            std::fs::write(&removed, log_text(&split.removed))?;
            eprintln!("kept {}, removed {}", split.kept.len(), split.removed.len());
        }
        Cmd::Summarize { logs, filter, out } => {
            let records = read_logs(&logs)?;
            let rows = if filter {
                let split = filter_outliers(&records);
                summarize(&split.kept, &split.removed)
            } else {
                summarize(&records, &[])
            };
            output(out.as_deref())?.write_all(summary_csv(&rows).as_bytes())?;
        }
        Cmd::Serve {
            port,
            host,
            lexicon,
            records,
        } => {
            let lex = load_lexicon(lexicon.as_deref())?;
            let clock = Clock::Wall(Instant::now());
            let state = match records {
                Some(p) => AppState::with_record_log(lex, clock, &p)?,
                None => AppState::new(lex, clock),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(SocketAddr::new(host, port), state))?;
        }
        Cmd::Lexicon { action } => match action {
            LexiconCmd::Dump => print!("{}", Lexicon::builtin_table()),
            LexiconCmd::Check { path } => {
                let lex = load_lexicon(Some(&path))?;
                println!(
                    "ok: {} shape terms, {} color terms, {} verbs, {} cancel phrases",
                    lex.shape_terms.len(),
                    lex.color_terms.len(),
                    lex.select_verbs.len(),
                    lex.cancel_phrases.len()
                );
            }
        },
        Cmd::Scene { action } => match action {
            SceneCmd::Dump {
                level,
                targets,
                seed,
                json,
            } => {
                let Ok(level) = level.parse::<PerplexityLevel>() else {
                    bail!("unknown perplexity level `{level}`");
                };
                let Some(n) = TargetCount::from_count(targets) else {
                    bail!("targets must be 1, 2 or 4");
                };
                let scene = generate_scene(level, n, seed, None)?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&scene)?);
                } else {
                    print!("{}", scene.to_text());
                }
            }
        },
    }
    Ok(())
}
