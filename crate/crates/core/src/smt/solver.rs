use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::sexp::{depth_delta, parse_all, Sexp};
use super::SmtScript;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
            Status::Timeout => "timeout",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// Assertion names, when unsat and a core was requested.
    pub core: Vec<String>,
    /// Integer constants of the model, when sat and a model was requested.
    pub model: BTreeMap<String, i64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("solver `{0}` could not be started: {1}")]
    NotFound(String, String),
    #[error("unexpected solver response: {0}")]
    Protocol(String),
    #[error("solver exited with status {code:?}: {stderr}")]
    NonZeroExit { code: Option<i32>, stderr: String },
    #[error("i/o error talking to the solver: {0}")]
    Io(String),
}

/// An external SMT-LIB 2 solver run as one child process per query.
#[derive(Clone, Debug)]
pub struct Solver {
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new("z3 -in -smt2", Duration::from_secs(30))
    }
}

struct Session {
    child: Child,
    lines: Receiver<String>,
    stderr: Arc<Mutex<String>>,
    deadline: Instant,
}

enum Incoming {
    Line(String),
    Timeout,
    Closed,
}

impl Session {
    fn read_line(&self) -> Incoming {
        loop {
            let left = self.deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => return Incoming::Line(l),
                Err(RecvTimeoutError::Timeout) => return Incoming::Timeout,
                Err(RecvTimeoutError::Disconnected) => return Incoming::Closed,
            }
        }
    }

    /// One complete response: an atom line or a balanced list.
    fn read_response(&mut self) -> Result<Option<String>, SolverError> {
        let mut text = String::new();
        let mut depth = 0;
        loop {
            match self.read_line() {
                Incoming::Line(l) => {
                    depth += depth_delta(&l);
                    text.push_str(&l);
                    text.push('\n');
                    if depth <= 0 {
                        let t = text.trim().to_string();
                        if t.starts_with("(error") {
                            return Err(SolverError::Protocol(t));
                        }
                        return Ok(Some(t));
                    }
                }
                Incoming::Timeout => return Ok(None),
                Incoming::Closed => return Err(self.closed()),
            }
        }
    }

    fn closed(&mut self) -> SolverError {
        let status = self.child.wait();
        let stderr = self.stderr.lock().map(|s| s.trim().to_string()).unwrap_or_default();
        match status {
            Ok(s) if !s.success() => SolverError::NonZeroExit { code: s.code(), stderr },
            Ok(_) => SolverError::Protocol(format!("solver closed its output early {stderr}").trim().to_string()),
            Err(e) => SolverError::Io(e.to_string()),
        }
    }

    fn send(&mut self, text: &str) -> Result<(), SolverError> {
        let stdin = self.child.stdin.as_mut().ok_or_else(|| SolverError::Io("stdin closed".into()))?;
        stdin.write_all(text.as_bytes()).and_then(|_| stdin.flush()).map_err(|e| SolverError::Io(e.to_string()))
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Solver {
    pub fn new(command: &str, timeout: Duration) -> Self {
        Solver { command: command.split_whitespace().map(String::from).collect(), timeout }
    }

    fn spawn(&self) -> Result<Session, SolverError> {
        let name = self.command.join(" ");
        let (program, args) = self.command.split_first().ok_or_else(|| SolverError::NotFound(name.clone(), "empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| SolverError::NotFound(name, e.to_string()))?;
        let stdout = child.stdout.take().unwrap();
        let mut err_pipe = child.stderr.take().unwrap();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = stderr.clone();
        thread::spawn(move || {
            let mut buf = String::new();
            let _ = err_pipe.read_to_string(&mut buf);
            if let Ok(mut s) = sink.lock() {
                s.push_str(&buf);
            }
        });
        Ok(Session { child, lines: rx, stderr, deadline: Instant::now() + self.timeout })
    }

    /// Run `(check-sat)` on the script, then fetch the unsat core or model
    /// when asked for.
    pub fn check(&self, script: &SmtScript, want_core: bool, want_model: bool) -> Result<Verdict, SolverError> {
        let mut s = self.spawn()?;
        let result = match self.run(&mut s, script, want_core, want_model) {
            // A broken pipe usually means the solver died; report how.
            Err(SolverError::Io(_)) => {
                let _ = s.child.kill();
                Err(s.closed())
            }
            r => r,
        };
        let _ = s.send("(exit)\n");
        s.kill();
        result
    }

    fn run(&self, s: &mut Session, script: &SmtScript, want_core: bool, want_model: bool) -> Result<Verdict, SolverError> {
        let mut verdict = Verdict { status: Status::Timeout, core: vec![], model: BTreeMap::new() };
        s.send(&script.to_smtlib())?;
        s.send("(check-sat)\n")?;
        let Some(answer) = s.read_response()? else { return Ok(verdict) };
        verdict.status = match answer.as_str() {
            "sat" => Status::Sat,
            "unsat" => Status::Unsat,
            "unknown" => Status::Unknown,
            "timeout" => Status::Timeout,
            other => return Err(SolverError::Protocol(other.to_string())),
        };
        if verdict.status == Status::Unsat && want_core {
            s.send("(get-unsat-core)\n")?;
            let Some(text) = s.read_response()? else {
                verdict.status = Status::Timeout;
                return Ok(verdict);
            };
            verdict.core = parse_core(&text)?;
        }
        if verdict.status == Status::Sat && want_model {
            s.send("(get-model)\n")?;
            let Some(text) = s.read_response()? else {
                verdict.status = Status::Timeout;
                return Ok(verdict);
            };
            verdict.model = parse_model(&text)?;
        }
        Ok(verdict)
    }
}

pub fn parse_core(text: &str) -> Result<Vec<String>, SolverError> {
    let all = parse_all(text).map_err(SolverError::Protocol)?;
    let items = all.first().and_then(Sexp::list).ok_or_else(|| SolverError::Protocol(text.to_string()))?;
    items
        .iter()
        .map(|s| s.atom().map(String::from).ok_or_else(|| SolverError::Protocol(text.to_string())))
        .collect()
}

/// Integer-valued nullary definitions of a model, in either the
/// `(model ...)` or bare-list form.
pub fn parse_model(text: &str) -> Result<BTreeMap<String, i64>, SolverError> {
    let all = parse_all(text).map_err(SolverError::Protocol)?;
    let mut items = all.first().and_then(Sexp::list).ok_or_else(|| SolverError::Protocol(text.to_string()))?;
    if items.first().and_then(Sexp::atom) == Some("model") {
        items = &items[1..];
    }
    let mut model = BTreeMap::new();
    for def in items {
        if let Some([Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), Sexp::Atom(sort), value]) = def.list() {
            if kw == "define-fun" && args.is_empty() && sort == "Int" {
                if let Some(v) = value.int() {
                    model.insert(name.clone(), v);
                }
            }
        }
    }
    Ok(model)
}
