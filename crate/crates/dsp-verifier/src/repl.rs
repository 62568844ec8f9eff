//! Wire-protocol client for a real checker process pool.
//!
//! Each worker is one single-threaded checker subprocess speaking
//! newline-delimited JSON on its standard streams. Requests serialize per
//! process; throughput comes from the pool. Sessions route to workers by
//! header fingerprint, so one worker loads each distinct header exactly
//! once and every statement sharing that header reuses the environment.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use dsp_core::{Diagnostic, Severity};

use crate::pool::header_fingerprint;
use crate::types::{
    RemainingGoal, StateHandle, TacticOutcome, TacticResult, Verifier, VerifierSession,
    VerifyResult,
};
use crate::wire::{ReplRequest, ReplResponse};
use crate::VerifierError;

fn default_pool_size() -> usize {
    8
}

fn default_timeout() -> u64 {
    300
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplConfig {
    /// Command line used to spawn one checker process.
    pub command: Vec<String>,
    #[serde(default = "default_pool_size")]
    pub pool_size: usize,
    /// Fallback timeout for header loads.
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
}

enum CallError {
    Timeout,
    Crashed(String),
    Protocol(String),
}

struct WorkerProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<Option<String>>,
}

impl WorkerProcess {
    fn spawn(command: &[String]) -> Result<Self, VerifierError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| VerifierError::Unavailable("empty checker command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| VerifierError::Unavailable(format!("spawn {program}: {e}")))?;
        let stdin = child
            .stdin
            .take()
            .ok_or_else(|| VerifierError::Unavailable("no stdin pipe".into()))?;
        let stdout = child
            .stdout
            .take()
            .ok_or_else(|| VerifierError::Unavailable("no stdout pipe".into()))?;
        let (tx, lines) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                match line {
                    Ok(line) => {
                        if tx.send(Some(line)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(None);
        });
        Ok(WorkerProcess { child, stdin, lines })
    }
}

impl Drop for WorkerProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Default)]
struct Worker {
    process: Option<WorkerProcess>,
    /// header fingerprint -> env id, valid for the current process only.
    env_cache: HashMap<String, u64>,
}

impl Worker {
    fn ensure_process(&mut self, command: &[String]) -> Result<&mut WorkerProcess, VerifierError> {
        if self.process.is_none() {
            self.process = Some(WorkerProcess::spawn(command)?);
            self.env_cache.clear();
        }
        Ok(self.process.as_mut().expect("just spawned"))
    }

    fn invalidate(&mut self) {
        self.process = None;
        self.env_cache.clear();
    }

    fn request(
        &mut self,
        command: &[String],
        request: &ReplRequest,
        timeout: Duration,
    ) -> Result<ReplResponse, CallError> {
        let process = match self.ensure_process(command) {
            Ok(p) => p,
            Err(e) => return Err(CallError::Crashed(e.to_string())),
        };
        let mut line = serde_json::to_string(request)
            .map_err(|e| CallError::Protocol(format!("encode request: {e}")))?;
        line.push('\n');
        if let Err(e) = process.stdin.write_all(line.as_bytes()).and_then(|_| process.stdin.flush())
        {
            self.invalidate();
            return Err(CallError::Crashed(format!("write request: {e}")));
        }
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                self.invalidate();
                return Err(CallError::Timeout);
            }
            match process.lines.recv_timeout(remaining) {
                Ok(Some(line)) => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return serde_json::from_str::<ReplResponse>(&line).map_err(|e| {
                        CallError::Protocol(format!("malformed response line: {e}"))
                    });
                }
                Ok(None) => {
                    self.invalidate();
                    return Err(CallError::Crashed("checker closed its stdout".into()));
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.invalidate();
                    return Err(CallError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.invalidate();
                    return Err(CallError::Crashed("reader thread gone".into()));
                }
            }
        }
    }
}

pub struct ReplVerifier {
    config: ReplConfig,
    workers: Vec<Mutex<Worker>>,
    /// header fingerprint -> header text, so a respawned worker can reload.
    headers: Mutex<HashMap<String, String>>,
    header_loads: AtomicU64,
    next_session: AtomicU64,
}

impl ReplVerifier {
    pub fn new(config: ReplConfig) -> Self {
        let pool_size = config.pool_size.max(1);
        ReplVerifier {
            config,
            workers: (0..pool_size).map(|_| Mutex::new(Worker::default())).collect(),
            headers: Mutex::new(HashMap::new()),
            header_loads: AtomicU64::new(0),
            next_session: AtomicU64::new(1),
        }
    }

    pub fn header_loads(&self) -> u64 {
        self.header_loads.load(Ordering::SeqCst)
    }

    /// Sticky routing: all sessions for one header land on one worker.
    fn worker_index(&self, fingerprint: &str) -> usize {
        let bucket = u64::from_str_radix(&fingerprint[..8.min(fingerprint.len())], 16).unwrap_or(0);
        (bucket as usize) % self.workers.len()
    }

    fn default_timeout(&self) -> Duration {
        Duration::from_secs(self.config.request_timeout_secs)
    }

    /// Load `header` on `worker` if its current process has not seen it.
    fn env_on_worker(
        &self,
        worker: &mut Worker,
        fingerprint: &str,
    ) -> Result<u64, VerifierError> {
        if let Some(&env) = worker.env_cache.get(fingerprint) {
            return Ok(env);
        }
        let header = self
            .headers
            .lock()
            .get(fingerprint)
            .cloned()
            .ok_or_else(|| VerifierError::Protocol("session for unknown header".into()))?;
        let response = worker
            .request(
                &self.config.command,
                &ReplRequest::cmd(header, None),
                self.default_timeout(),
            )
            .map_err(|e| match e {
                CallError::Timeout => VerifierError::Unavailable("header load timed out".into()),
                CallError::Crashed(m) | CallError::Protocol(m) => VerifierError::Unavailable(m),
            })?;
        if let Some(message) = response.message {
            return Err(VerifierError::Unavailable(message));
        }
        let env = response
            .env
            .ok_or_else(|| VerifierError::Protocol("header load returned no env".into()))?;
        worker.env_cache.insert(fingerprint.to_string(), env);
        self.header_loads.fetch_add(1, Ordering::SeqCst);
        Ok(env)
    }
}

fn severity_from(s: &str) -> Severity {
    match s {
        "error" => Severity::Error,
        "warning" => Severity::Warning,
        _ => Severity::Info,
    }
}

fn verify_result_from(response: &ReplResponse, elapsed: Duration) -> VerifyResult {
    let diagnostics = response
        .messages
        .iter()
        .map(|m| Diagnostic {
            line: m.pos.line as usize,
            column: m.pos.column as usize,
            severity: severity_from(&m.severity),
            message: m.data.clone(),
            end_line: m.end_pos.map(|p| p.line as usize),
        })
        .collect();
    let remaining_goals = response
        .sorries
        .iter()
        .filter_map(|s| {
            s.proof_state.map(|ps| RemainingGoal {
                goal_id: StateHandle(ps.to_string()),
                goal_pretty: s.goal.clone(),
                line: s.pos.line as usize,
                column: s.pos.column as usize,
            })
        })
        .collect();
    VerifyResult {
        diagnostics,
        remaining_goals,
        elapsed_secs: elapsed.as_secs_f64(),
    }
}

impl Verifier for ReplVerifier {
    fn name(&self) -> &'static str {
        "repl"
    }

    fn open_session(&self, header: &str) -> Result<VerifierSession, VerifierError> {
        let fingerprint = header_fingerprint(header);
        self.headers
            .lock()
            .entry(fingerprint.clone())
            .or_insert_with(|| header.to_string());
        let index = self.worker_index(&fingerprint);
        let mut worker = self.workers[index].lock();
        let environment_handle = self.env_on_worker(&mut worker, &fingerprint)?;
        Ok(VerifierSession {
            session_id: self.next_session.fetch_add(1, Ordering::SeqCst),
            environment_handle,
            header_fingerprint: fingerprint,
        })
    }

    fn verify(
        &self,
        session: &VerifierSession,
        source: &str,
        timeout: Duration,
    ) -> Result<VerifyResult, VerifierError> {
        let index = self.worker_index(&session.header_fingerprint);
        let mut worker = self.workers[index].lock();
        let started = Instant::now();
        // One crash retry on a fresh process; the env reloads on demand.
        for attempt in 0..2 {
            let env = self.env_on_worker(&mut worker, &session.header_fingerprint)?;
            match worker.request(
                &self.config.command,
                &ReplRequest::cmd(source, Some(env)),
                timeout,
            ) {
                Ok(response) => {
                    if let Some(message) = response.message {
                        return Err(VerifierError::Protocol(message));
                    }
                    return Ok(verify_result_from(&response, started.elapsed()));
                }
                Err(CallError::Timeout) => {
                    return Ok(VerifyResult {
                        diagnostics: vec![Diagnostic::error(1, 0, "verification timed out")],
                        remaining_goals: Vec::new(),
                        elapsed_secs: started.elapsed().as_secs_f64(),
                    });
                }
                Err(CallError::Protocol(m)) => return Err(VerifierError::Protocol(m)),
                Err(CallError::Crashed(m)) => {
                    tracing::warn!("checker crashed ({m}); retry {attempt}");
                    continue;
                }
            }
        }
        Err(VerifierError::Unavailable(
            "checker crashed twice during verify".into(),
        ))
    }

    fn apply_tactic(
        &self,
        session: &VerifierSession,
        state: &StateHandle,
        tactic: &str,
        timeout: Duration,
    ) -> Result<TacticResult, VerifierError> {
        let proof_state: u64 = state
            .0
            .parse()
            .map_err(|_| VerifierError::Protocol(format!("dead state handle `{}`", state.0)))?;
        let index = self.worker_index(&session.header_fingerprint);
        let mut worker = self.workers[index].lock();
        let started = Instant::now();
        match worker.request(
            &self.config.command,
            &ReplRequest::tactic(tactic, proof_state),
            timeout,
        ) {
            Ok(response) => {
                let elapsed_secs = started.elapsed().as_secs_f64();
                let outcome = if let Some(message) = response.message {
                    TacticOutcome::Failed { message }
                } else if let Some(error) = response.messages.iter().find(|m| m.severity == "error")
                {
                    TacticOutcome::Failed {
                        message: error.data.clone(),
                    }
                } else {
                    match (&response.goals, response.proof_state) {
                        (Some(goals), _) if goals.is_empty() => TacticOutcome::Solved,
                        (Some(goals), Some(ps)) => TacticOutcome::NewState {
                            state: StateHandle(ps.to_string()),
                            goal_pretty: goals.join("\n"),
                        },
                        _ => {
                            return Err(VerifierError::Protocol(
                                "tactic response carried neither goals nor an error".into(),
                            ))
                        }
                    }
                };
                Ok(TacticResult {
                    outcome,
                    elapsed_secs,
                })
            }
            Err(CallError::Timeout) => Ok(TacticResult {
                outcome: TacticOutcome::Failed {
                    message: "timeout".into(),
                },
                elapsed_secs: started.elapsed().as_secs_f64(),
            }),
            Err(CallError::Protocol(m)) => Err(VerifierError::Protocol(m)),
            // The proof state died with the process; there is nothing to
            // retry against.
            Err(CallError::Crashed(m)) => Err(VerifierError::Unavailable(m)),
        }
    }
}
