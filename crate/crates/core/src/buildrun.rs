//! Runs the external build command and streams its output.
//!
//! Standard output and standard error are merged line by line in arrival
//! order. Each session delivers exactly one `Started`, then one `OutputLine`
//! per line, then one `Finished` on an ordered queue.

use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use thiserror::Error;

use crate::diagnostics::{apply_ignores, counts, parse_stream, Diagnostic, IgnoreStore};

/// Exit code reported for a cancelled build.
pub const CANCELLED_EXIT_CODE: i32 = -1;

const POLL: Duration = Duration::from_millis(10);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildEvent {
    Started,
    OutputLine(String),
    Finished {
        exit_code: i32,
        error_count: usize,
        warning_count: usize,
    },
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("build command is empty")]
    EmptyCommand,
    #[error("command not found: {0}")]
    CommandNotFound(String),
    #[error("cannot start {program}: {source}")]
    SpawnFailure {
        program: String,
        #[source]
        source: io::Error,
    },
    #[error("build already finished")]
    AlreadyFinished,
}

/// Result of a completed (or cancelled) session.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildOutcome {
    pub exit_code: i32,
    pub cancelled: bool,
    /// Raw build log, one entry per output line.
    pub lines: Vec<String>,
    /// Parsed diagnostics with ignores applied.
    pub diagnostics: Vec<Diagnostic>,
    pub error_count: usize,
    pub warning_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Running,
    Cancelling,
    Finished,
}

/// Handle to a running build.
#[derive(Debug)]
pub struct BuildSession {
    events: Receiver<BuildEvent>,
    state: Arc<Mutex<State>>,
    pid: u32,
    supervisor: Option<JoinHandle<BuildOutcome>>,
    outcome: Option<BuildOutcome>,
}

fn read_lines(source: impl Read, tx: Sender<String>) {
    let mut reader = BufReader::new(source);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) | Err(_) => break,
            Ok(_) => {
                if buf.last() == Some(&b'\n') {
                    buf.pop();
                }
                if buf.last() == Some(&b'\r') {
                    buf.pop();
                }
                if tx.send(String::from_utf8_lossy(&buf).into_owned()).is_err() {
                    break;
                }
            }
        }
    }
}

fn exit_code(status: ExitStatus) -> i32 {
    #[cfg(unix)]
    {
        use std::os::unix::process::ExitStatusExt;
        if let Some(sig) = status.signal() {
            return 128 + sig;
        }
    }
    status.code().unwrap_or(CANCELLED_EXIT_CODE)
}

#[cfg(unix)]
fn kill_tree(pid: u32) {
    // the child leads its own process group, so this also reaches
    // grandchildren such as the shell's `sleep`
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

#[cfg(not(unix))]
fn kill_tree(_pid: u32) {}

/// Spawns `command` in `root` without shell interpretation.
///
/// A missing executable is [`BuildError::CommandNotFound`] and produces no
/// events. A failing build is a normal `Finished` event.
pub fn start_build(command: &[String], root: &Path, ignores: IgnoreStore) -> Result<BuildSession, BuildError> {
    let (program, args) = command.split_first().ok_or(BuildError::EmptyCommand)?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(root)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let mut child = cmd.spawn().map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => BuildError::CommandNotFound(program.clone()),
        _ => BuildError::SpawnFailure {
            program: program.clone(),
            source: e,
        },
    })?;

    let (events_tx, events) = mpsc::channel();
    let state = Arc::new(Mutex::new(State::Running));
    let pid = child.id();
    let _ = events_tx.send(BuildEvent::Started);

    let (lines_tx, lines_rx) = mpsc::channel();
    let stdout = child.stdout.take().expect("stdout piped");
    let stderr = child.stderr.take().expect("stderr piped");
    let tx_out = lines_tx.clone();
    thread::spawn(move || read_lines(stdout, tx_out));
    thread::spawn(move || read_lines(stderr, lines_tx));

    let sup_state = Arc::clone(&state);
    let supervisor = thread::spawn(move || supervise(child, lines_rx, events_tx, sup_state, ignores));
    Ok(BuildSession {
        events,
        state,
        pid,
        supervisor: Some(supervisor),
        outcome: None,
    })
}

fn supervise(
    mut child: Child,
    lines_rx: Receiver<String>,
    events: Sender<BuildEvent>,
    state: Arc<Mutex<State>>,
    ignores: IgnoreStore,
) -> BuildOutcome {
    let mut lines = Vec::new();
    let emit = |line: String, lines: &mut Vec<String>| {
        let _ = events.send(BuildEvent::OutputLine(line.clone()));
        lines.push(line);
    };
    let cancelled = loop {
        match lines_rx.recv_timeout(POLL) {
            Ok(line) => emit(line, &mut lines),
            Err(RecvTimeoutError::Timeout) => {
                if *state.lock().unwrap() == State::Cancelling {
                    break true;
                }
            }
            Err(RecvTimeoutError::Disconnected) => break false,
        }
    };
    if cancelled {
        while let Ok(line) = lines_rx.try_recv() {
            emit(line, &mut lines);
        }
        let _ = child.kill();
    }
    let status = child.wait();
    let exit = {
        let mut st = state.lock().unwrap();
        let was_cancelled = cancelled || *st == State::Cancelling;
        *st = State::Finished;
        if was_cancelled {
            None
        } else {
            Some(status.map(exit_code).unwrap_or(CANCELLED_EXIT_CODE))
        }
    };
    let diagnostics = apply_ignores(&parse_stream(&lines), &ignores);
    let (error_count, warning_count) = counts(&diagnostics);
    let exit_code = exit.unwrap_or(CANCELLED_EXIT_CODE);
    let _ = events.send(BuildEvent::Finished {
        exit_code,
        error_count,
        warning_count,
    });
    BuildOutcome {
        exit_code,
        cancelled: exit.is_none(),
        lines,
        diagnostics,
        error_count,
        warning_count,
    }
}

impl BuildSession {
    /// Blocks for the next event; `None` after `Finished` was delivered.
    pub fn next_event(&self) -> Option<BuildEvent> {
        self.events.recv().ok()
    }

    pub fn next_event_timeout(&self, timeout: Duration) -> Option<BuildEvent> {
        self.events.recv_timeout(timeout).ok()
    }

    pub fn try_next_event(&self) -> Option<BuildEvent> {
        self.events.try_recv().ok()
    }

    pub fn is_finished(&self) -> bool {
        *self.state.lock().unwrap() == State::Finished
    }

    /// Terminates the build. `Finished` is emitted with
    /// [`CANCELLED_EXIT_CODE`] and counts over the lines seen so far.
    pub fn cancel(&mut self) -> Result<(), BuildError> {
        {
            let mut st = self.state.lock().unwrap();
            match *st {
                State::Finished => return Err(BuildError::AlreadyFinished),
                State::Cancelling => {}
                State::Running => {
                    *st = State::Cancelling;
                    kill_tree(self.pid);
                }
            }
        }
        self.join();
        Ok(())
    }

    fn join(&mut self) {
        if let Some(handle) = self.supervisor.take() {
            self.outcome = Some(handle.join().expect("build supervisor panicked"));
        }
    }

    /// Waits for the build to end. Undelivered events stay queued.
    pub fn wait(mut self) -> BuildOutcome {
        self.join();
        self.outcome.take().unwrap_or_default()
    }

    /// Waits for the build, returning every event not yet consumed.
    pub fn collect(mut self) -> (Vec<BuildEvent>, BuildOutcome) {
        self.join();
        let events = self.events.try_iter().collect();
        (events, self.outcome.take().unwrap_or_default())
    }
}

impl Drop for BuildSession {
    fn drop(&mut self) {
        if self.supervisor.is_some() && !self.is_finished() {
            let _ = self.cancel();
        }
    }
}

/// Keeps at most one build running; starting a new one cancels the old.
#[derive(Debug, Default)]
pub struct BuildRunner {
    current: Option<BuildSession>,
}

impl BuildRunner {
    pub fn start(
        &mut self,
        command: &[String],
        root: &Path,
        ignores: IgnoreStore,
    ) -> Result<&mut BuildSession, BuildError> {
        if let Some(mut old) = self.current.take() {
            if !old.is_finished() {
                let _ = old.cancel();
            }
        }
        let session = start_build(command, root, ignores)?;
        Ok(self.current.insert(session))
    }

    pub fn current(&mut self) -> Option<&mut BuildSession> {
        self.current.as_mut()
    }

    pub fn take(&mut self) -> Option<BuildSession> {
        self.current.take()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    fn sh(script: &str) -> Vec<String> {
        vec!["sh".into(), "-c".into(), script.into()]
    }

    fn run(cmd: &[String]) -> (Vec<BuildEvent>, BuildOutcome) {
        start_build(cmd, Path::new("."), IgnoreStore::default())
            .unwrap()
            .collect()
    }

    #[test]
    fn silent_success() {
        let (events, out) = run(&["true".to_string()]);
        assert_eq!(
            events,
            vec![
                BuildEvent::Started,
                BuildEvent::Finished {
                    exit_code: 0,
                    error_count: 0,
                    warning_count: 0
                }
            ]
        );
        assert!(!out.cancelled);
    }

    #[test]
    fn missing_command() {
        let err = start_build(&["no-such-cc".to_string()], Path::new("."), IgnoreStore::default()).unwrap_err();
        assert!(matches!(err, BuildError::CommandNotFound(ref p) if p == "no-such-cc"));
        assert!(matches!(
            start_build(&[], Path::new("."), IgnoreStore::default()),
            Err(BuildError::EmptyCommand)
        ));
    }

    #[test]
    fn fake_compiler_counts() {
        let script =
            "echo 'a.c:1:2: error: one'; echo 'a.c:3: warning: w' >&2; echo 'b.c:4:1: error: two'; echo noise; exit 1";
        let (events, out) = run(&sh(script));
        assert_eq!(events.first(), Some(&BuildEvent::Started));
        assert_eq!(
            events.last(),
            Some(&BuildEvent::Finished {
                exit_code: 1,
                error_count: 2,
                warning_count: 1
            })
        );
        assert_eq!(events.len(), 6);
        assert_eq!(out.lines.len(), 4);
        assert_eq!(out.diagnostics.len(), 3);
    }

    #[test]
    fn output_is_not_shell_interpreted() {
        let (_, out) = run(&["echo".into(), "$HOME;".into(), "x:1: error: y".into()]);
        assert_eq!(out.lines, ["$HOME; x:1: error: y"]);
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let (_, out) = run(&sh("printf 'a.c:1: error: bad \\377 byte\\r\\n'"));
        assert_eq!(out.lines, ["a.c:1: error: bad \u{fffd} byte"]);
        assert_eq!(out.error_count, 1);
    }

    #[test]
    fn ignores_apply_to_counts() {
        let mut ignores = IgnoreStore::default();
        ignores.insert(crate::diagnostics::WarningFingerprint {
            file: "a.c".into(),
            message: "w".into(),
        });
        let out = start_build(&sh("echo 'a.c:9: warning: w'"), Path::new("."), ignores)
            .unwrap()
            .wait();
        assert_eq!((out.error_count, out.warning_count), (0, 0));
    }

    #[test]
    fn cancel_running_build() {
        let started = Instant::now();
        let mut s = start_build(
            &sh("echo 'a.c:1: error: early'; sleep 30; echo 'a.c:2: error: late'"),
            Path::new("."),
            IgnoreStore::default(),
        )
        .unwrap();
        assert_eq!(s.next_event(), Some(BuildEvent::Started));
        assert!(matches!(s.next_event(), Some(BuildEvent::OutputLine(_))));
        s.cancel().unwrap();
        assert_eq!(
            s.next_event(),
            Some(BuildEvent::Finished {
                exit_code: CANCELLED_EXIT_CODE,
                error_count: 1,
                warning_count: 0
            })
        );
        assert!(started.elapsed() < Duration::from_secs(10));
        assert!(matches!(s.cancel(), Err(BuildError::AlreadyFinished)));
        assert!(s.wait().cancelled);
    }

    #[test]
    fn cancel_after_finish() {
        let mut s = start_build(&["true".to_string()], Path::new("."), IgnoreStore::default()).unwrap();
        while let Some(ev) = s.next_event() {
            if matches!(ev, BuildEvent::Finished { .. }) {
                break;
            }
        }
        while !s.is_finished() {
            thread::sleep(POLL);
        }
        assert!(matches!(s.cancel(), Err(BuildError::AlreadyFinished)));
    }

    #[test]
    fn runner_cancels_previous_session() {
        let mut runner = BuildRunner::default();
        runner
            .start(&sh("sleep 30"), Path::new("."), IgnoreStore::default())
            .unwrap();
        let started = Instant::now();
        let s = runner
            .start(&["true".to_string()], Path::new("."), IgnoreStore::default())
            .unwrap();
        assert_eq!(s.next_event(), Some(BuildEvent::Started));
        let out = runner.take().unwrap().wait();
        assert_eq!(out.exit_code, 0);
        assert!(started.elapsed() < Duration::from_secs(10));
    }
}
