//! One interactive run of a plan. Directives are generated on request, the
//! subject's placements are checked against them, and every event is
//! appended to a replayable log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use egt_core::report::{narrate, narrated_relation, GeneratorKind, Narration};
use egt_core::resolver::check_placement;
use egt_core::scene::SceneFile;
use egt_core::stats::{estimate_duration, LogEntry, SECONDS_PER_WORD};
use egt_core::{EgtConfig, InteractionContext, MoveDirective, Plan, Scene, SceneError, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid scene: {0}")]
    Scene(#[from] SceneError),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("the plan has no further steps")]
    Finished,
    #[error("no directive is waiting for an action")]
    NoDirective,
    #[error("directive `{got}` is not the one waiting for an action (`{expected}`)")]
    WrongDirective { expected: String, got: String },
    #[error("step {step} cannot be narrated: {message}")]
    Generation { step: usize, message: String },
    #[error("session log: {0}")]
    Io(#[from] std::io::Error),
    #[error("replay diverged at record {record}: {message}")]
    Replay { record: usize, message: String },
}

/// What a session is created from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSetup {
    pub scene: SceneFile,
    pub plan: Plan,
    #[serde(default)]
    pub generator: GeneratorKind,
}

/// Subject's report of one placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionReport {
    pub directive_id: String,
    pub placed_at: Vec3,
    pub response_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speech_duration_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionOutcome {
    pub accurate: bool,
    pub next_available: bool,
}

/// One line of the session file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogRecord {
    Created {
        id: String,
        #[serde(flatten)]
        setup: Box<SessionSetup>,
    },
    Directive {
        step: usize,
        directive_id: String,
        surface: String,
    },
    Action {
        directive_id: String,
        placed_at: Vec3,
        speech_duration_ms: Option<f64>,
        #[serde(flatten)]
        entry: Box<LogEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Pending {
    pub directive_id: String,
    pub step: usize,
    pub directive: MoveDirective,
    pub narration: Narration,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub generator: GeneratorKind,
    pub plan: Plan,
    pub scene: Scene,
    pub ctx: InteractionContext,
    /// Steps completed so far.
    pub cursor: usize,
    pub pending: Option<Pending>,
    pub log: Vec<LogEntry>,
    sink: Option<PathBuf>,
}

impl Session {
    /// Validates the setup and, when a path is given, starts the session
    /// file with a `created` record.
    pub fn create(id: String, setup: SessionSetup, sink: Option<PathBuf>) -> Result<Self, SessionError> {
        let scene = setup.scene.clone().into_scene()?;
        let session = Self {
            id: id.clone(),
            generator: setup.generator,
            plan: setup.plan.clone(),
            scene,
            ctx: InteractionContext::new(),
            cursor: 0,
            pending: None,
            log: Vec::new(),
            sink,
        };
        if let Some(p) = &session.sink {
            File::create(p)?;
        }
        session.append(&LogRecord::Created { id, setup: Box::new(setup) })?;
        Ok(session)
    }

    fn append(&self, record: &LogRecord) -> Result<(), SessionError> {
        if let Some(p) = &self.sink {
            let mut f = OpenOptions::new().append(true).open(p)?;
            let line = serde_json::to_string(record).map_err(|e| SessionError::Invalid(e.to_string()))?;
            writeln!(f, "{line}")?;
            f.flush()?;
        }
        Ok(())
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.plan.steps.len()
    }

    /// The directive for the next step. Asking again before the action
    /// arrives returns the same directive.
    pub fn step(&mut self, cfg: &EgtConfig) -> Result<&Pending, SessionError> {
        if self.pending.is_none() {
            if self.is_done() {
                return Err(SessionError::Finished);
            }
            let step = self.cursor;
            let directive = self.plan.directive(step, &self.scene)?;
            let narration = narrate(self.generator, &directive, &self.scene, &self.ctx, cfg).map_err(|e| {
                SessionError::Generation {
                    step,
                    message: e.to_string(),
                }
            })?;
            let pending = Pending {
                directive_id: format!("{}-{}", self.id, step),
                step,
                directive,
                narration,
            };
            self.append(&LogRecord::Directive {
                step,
                directive_id: pending.directive_id.clone(),
                surface: pending.narration.best().surface.clone(),
            })?;
            self.pending = Some(pending);
        }
        Ok(self.pending.as_ref().expect("just set"))
    }

    /// Checks the placement against the spoken directive, then advances the
    /// plan. The scene follows the plan whether or not the placement was
    /// accurate; the context remembers whether it was.
    pub fn act(&mut self, report: &ActionReport, cfg: &EgtConfig) -> Result<ActionOutcome, SessionError> {
        let p = report.placed_at;
        if ![p.x, p.y, p.z].iter().all(|v| v.is_finite()) {
            return Err(SessionError::Invalid("placedAt must be three finite numbers".into()));
        }
        if !(report.response_time_ms.is_finite() && report.response_time_ms >= 0.0) {
            return Err(SessionError::Invalid("responseTimeMs must be a non-negative number".into()));
        }
        if let Some(s) = report.speech_duration_ms {
            if !(s.is_finite() && s >= 0.0) {
                return Err(SessionError::Invalid("speechDurationMs must be a non-negative number".into()));
            }
        }
        let pending = self.pending.as_ref().ok_or(SessionError::NoDirective)?;
        if pending.directive_id != report.directive_id {
            return Err(SessionError::WrongDirective {
                expected: pending.directive_id.clone(),
                got: report.directive_id.clone(),
            });
        }
        let best = pending.narration.best();
        let accurate = check_placement(&best.eci, p, &self.scene, &self.ctx, &cfg.field).unwrap_or(false);
        let (next, placed) = self.scene.apply_move(&pending.directive)?;
        let entry = LogEntry {
            step: pending.step,
            directive: best.surface.clone(),
            features: best.features,
            depth: best.depth,
            utterance_duration: report
                .speech_duration_ms
                .map_or_else(|| estimate_duration(&best.surface, SECONDS_PER_WORD), |ms| ms / 1000.0),
            response_time: report.response_time_ms / 1000.0,
            accurate: Some(accurate),
            subject: self.id.clone(),
        };
        self.append(&LogRecord::Action {
            directive_id: pending.directive_id.clone(),
            placed_at: p,
            speech_duration_ms: report.speech_duration_ms,
            entry: Box::new(entry.clone()),
        })?;
        let narrated = narrated_relation(&best.eci, &self.ctx);
        self.ctx.record_action(&placed, &next, narrated, accurate, &cfg.field);
        self.scene = next;
        self.cursor += 1;
        self.pending = None;
        self.log.push(entry);
        Ok(ActionOutcome {
            accurate,
            next_available: !self.is_done(),
        })
    }

    /// Rebuilds a session from its records, regenerating every directive and
    /// re-checking every action. Fails on the first disagreement.
    pub fn replay(records: &[LogRecord], cfg: &EgtConfig) -> Result<Session, SessionError> {
        let diverged = |record: usize, message: String| SessionError::Replay { record, message };
        let Some(LogRecord::Created { id, setup }) = records.first() else {
            return Err(diverged(0, "the first record must be `created`".into()));
        };
        let mut s = Session::create(id.clone(), (**setup).clone(), None)?;
        for (i, r) in records.iter().enumerate().skip(1) {
            match r {
                LogRecord::Created { .. } => return Err(diverged(i, "second `created` record".into())),
                LogRecord::Directive { step, directive_id, surface } => {
                    let p = s.step(cfg)?;
                    if p.step != *step || p.directive_id != *directive_id || p.narration.best().surface != *surface {
                        return Err(diverged(i, format!("regenerated `{}`, logged `{surface}`", p.narration.best().surface)));
                    }
                }
                LogRecord::Action {
                    directive_id,
                    placed_at,
                    speech_duration_ms,
                    entry,
                } => {
                    let report = ActionReport {
                        directive_id: directive_id.clone(),
                        placed_at: *placed_at,
                        response_time_ms: entry.response_time * 1000.0,
                        speech_duration_ms: *speech_duration_ms,
                    };
                    let out = s.act(&report, cfg)?;
                    if Some(out.accurate) != entry.accurate {
                        return Err(diverged(i, "accuracy differs".into()));
                    }
                }
            }
        }
        Ok(s)
    }
}

pub fn read_records(path: &Path) -> Result<Vec<LogRecord>, SessionError> {
    let f = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| SessionError::Invalid(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}
