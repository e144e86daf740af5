//! Breakpoints, debug sessions, call-stack trees and the watched-variables
//! document.
//!
//! Sessions sit behind [`DebugSession`]. The bundled implementation,
//! [`TraceSession`], replays a recorded trace: UTF-8, one JSON object per
//! line, blank lines skipped.
//!
//! ```text
//! {"ev":"stopped","bp":ID,"threads":[{"id":N,"name":S,"frames":[{"fn":S,"file":S,"line":N},...]}],"vars":[{"expr":S,"value":S},...]}
//! {"ev":"continued"}
//! {"ev":"exited","code":N}
//! ```
//!
//! Frames are listed outermost first. Unknown keys are ignored; an unknown
//! `ev` is an error. `bp` and `vars` may be omitted.

use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crumbs::{Mode, ModeCause, NavTree, NodeId, NodeKind};
use crate::statusbar::{ActionRef, Category, Message};
use crate::workspace::{normalize_path, Document, LanguageHint, Store};
use crate::Location;

/// Path of the virtual variables document.
pub const VARIABLES_DOCUMENT: &str = "<variables>";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Breakpoint {
    pub id: u64,
    pub file: String,
    pub line: usize,
    /// Stored verbatim; never evaluated.
    #[serde(default)]
    pub condition: Option<String>,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
    #[serde(default)]
    pub hit_count: u64,
}

fn enabled_default() -> bool {
    true
}

impl Breakpoint {
    pub fn location(&self) -> Location {
        Location::new(self.file.clone(), self.line)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown breakpoint {0}")]
pub struct UnknownBreakpoint(pub u64);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Toggled {
    Added(Breakpoint),
    Removed(Breakpoint),
}

/// Contents of `.solowin/breakpoints.json`: at most one breakpoint per
/// (file, line), ids assigned in increasing order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakpointStore {
    #[serde(default)]
    next_id: u64,
    #[serde(default)]
    breakpoints: Vec<Breakpoint>,
}

impl Store for BreakpointStore {
    const FILE_NAME: &'static str = "breakpoints.json";
}

impl BreakpointStore {
    /// Checks the one-per-location and unique-id invariants of a loaded
    /// store.
    pub fn validate(&self) -> Result<(), String> {
        let mut locs = BTreeMap::new();
        let mut ids = BTreeMap::new();
        for bp in &self.breakpoints {
            if bp.line == 0 {
                return Err(format!("breakpoint {} has line 0", bp.id));
            }
            if locs.insert((bp.file.as_str(), bp.line), bp.id).is_some() {
                return Err(format!("two breakpoints at {}:{}", bp.file, bp.line));
            }
            if ids.insert(bp.id, ()).is_some() {
                return Err(format!("duplicate breakpoint id {}", bp.id));
            }
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Breakpoint> {
        self.breakpoints.iter()
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Breakpoint> {
        self.breakpoints.iter().find(|b| b.id == id)
    }

    pub fn at(&self, file: &str, line: usize) -> Option<&Breakpoint> {
        self.breakpoints.iter().find(|b| b.file == file && b.line == line)
    }

    fn allocate_id(&mut self) -> u64 {
        let floor = self.breakpoints.iter().map(|b| b.id + 1).max().unwrap_or(1);
        let id = self.next_id.max(floor).max(1);
        self.next_id = id + 1;
        id
    }

    /// Adds an enabled breakpoint at (file, line), or removes the one there.
    pub fn toggle(&mut self, file: &str, line: usize) -> Toggled {
        if let Some(pos) = self.breakpoints.iter().position(|b| b.file == file && b.line == line) {
            return Toggled::Removed(self.breakpoints.remove(pos));
        }
        let bp = Breakpoint {
            id: self.allocate_id(),
            file: file.to_string(),
            line,
            condition: None,
            enabled: true,
            hit_count: 0,
        };
        self.breakpoints.push(bp.clone());
        self.breakpoints
            .sort_by(|a, b| (&a.file, a.line).cmp(&(&b.file, b.line)));
        Toggled::Added(bp)
    }

    pub fn edit(&mut self, id: u64, condition: Option<String>, enabled: bool) -> Result<Breakpoint, UnknownBreakpoint> {
        let bp = self
            .breakpoints
            .iter_mut()
            .find(|b| b.id == id)
            .ok_or(UnknownBreakpoint(id))?;
        bp.condition = condition.filter(|c| !c.trim().is_empty());
        bp.enabled = enabled;
        Ok(bp.clone())
    }

    pub fn record_hit(&mut self, id: u64) -> Option<&Breakpoint> {
        let bp = self.breakpoints.iter_mut().find(|b| b.id == id)?;
        bp.hit_count += 1;
        Some(bp)
    }

    pub fn reset_hits(&mut self) {
        for bp in &mut self.breakpoints {
            bp.hit_count = 0;
        }
    }

    /// Breakpoint counts per file.
    pub fn per_file(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for bp in &self.breakpoints {
            *out.entry(bp.file.clone()).or_insert(0) += 1;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub function: String,
    pub file: String,
    pub line: usize,
}

impl Frame {
    pub fn location(&self) -> Location {
        Location::new(self.file.clone(), self.line)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreadState {
    pub id: u64,
    pub name: String,
    /// Outermost first; never empty.
    pub frames: Vec<Frame>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Watch {
    pub expr: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DebugSnapshot {
    pub threads: Vec<ThreadState>,
    pub variables: Vec<Watch>,
    pub stopped_breakpoint: Option<u64>,
}

impl DebugSnapshot {
    /// Innermost frame of the first thread.
    pub fn stop_location(&self) -> Option<Location> {
        self.threads.first()?.frames.last().map(Frame::location)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DebugEvent {
    Stopped(DebugSnapshot),
    Continued,
    Exited { code: i64 },
}

/// A source of debugger events. Implement this to drive the model from a
/// live debug adapter instead of a recorded trace.
pub trait DebugSession: Send {
    fn next_event(&mut self) -> Option<DebugEvent>;
    fn pending(&self) -> usize;
}

#[derive(Debug, Error)]
pub enum DebugError {
    #[error("malformed trace, line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },
    #[error("cannot read trace {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("debug session exhausted")]
    SessionExhausted,
    #[error("no debug session")]
    NoSession,
}

#[derive(Deserialize)]
#[serde(tag = "ev", rename_all = "lowercase")]
enum TraceRecord {
    Stopped {
        #[serde(default)]
        bp: Option<u64>,
        threads: Vec<ThreadRecord>,
        #[serde(default)]
        vars: Vec<VarRecord>,
    },
    Continued,
    Exited {
        code: i64,
    },
}

#[derive(Deserialize)]
struct ThreadRecord {
    id: u64,
    name: String,
    frames: Vec<FrameRecord>,
}

#[derive(Deserialize)]
struct FrameRecord {
    #[serde(rename = "fn")]
    function: String,
    file: String,
    line: usize,
}

#[derive(Deserialize)]
struct VarRecord {
    expr: String,
    value: String,
}

fn convert(record: TraceRecord) -> Result<DebugEvent, String> {
    Ok(match record {
        TraceRecord::Continued => DebugEvent::Continued,
        TraceRecord::Exited { code } => DebugEvent::Exited { code },
        TraceRecord::Stopped { bp, threads, vars } => {
            if threads.is_empty() {
                return Err("stopped event without threads".into());
            }
            let threads = threads
                .into_iter()
                .map(|t| {
                    if t.frames.is_empty() {
                        return Err(format!("thread {} has no frames", t.id));
                    }
                    let frames = t
                        .frames
                        .into_iter()
                        .map(|f| {
                            if f.line == 0 {
                                return Err(format!("frame {} has line 0", f.function));
                            }
                            let file = normalize_path(&f.file)
                                .filter(|p| !p.is_empty())
                                .ok_or_else(|| format!("frame file {:?} escapes the project", f.file))?;
                            Ok(Frame {
                                function: f.function,
                                file,
                                line: f.line,
                            })
                        })
                        .collect::<Result<Vec<_>, String>>()?;
                    Ok(ThreadState {
                        id: t.id,
                        name: t.name,
                        frames,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            DebugEvent::Stopped(DebugSnapshot {
                threads,
                variables: vars
                    .into_iter()
                    .map(|v| Watch {
                        expr: v.expr,
                        value: v.value,
                    })
                    .collect(),
                stopped_breakpoint: bp,
            })
        }
    })
}

/// Replays recorded debugger events.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceSession {
    events: VecDeque<DebugEvent>,
}

impl TraceSession {
    pub fn parse(text: &str) -> Result<Self, DebugError> {
        let mut events = VecDeque::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |reason: String| DebugError::MalformedTrace { line: idx + 1, reason };
            let record: TraceRecord = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
            events.push_back(convert(record).map_err(malformed)?);
        }
        Ok(TraceSession { events })
    }
}

impl DebugSession for TraceSession {
    fn next_event(&mut self) -> Option<DebugEvent> {
        self.events.pop_front()
    }

    fn pending(&self) -> usize {
        self.events.len()
    }
}

/// Reads a trace file into a session positioned before its first event.
pub fn load_trace(path: &Path) -> Result<TraceSession, DebugError> {
    let text = fs::read_to_string(path).map_err(|source| DebugError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TraceSession::parse(&text)
}

/// Side effects of one session step, for the owner to apply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub event: DebugEvent,
    pub mode_cause: ModeCause,
    pub message: Message,
    /// Where the inline breakpoint editor should open.
    pub editor_at: Option<Location>,
}

/// Drives a [`DebugSession`] and holds the current stop state.
pub struct Debugger {
    session: Box<dyn DebugSession>,
    snapshot: Option<DebugSnapshot>,
    selected_frame: Option<(usize, usize)>,
    exit_code: Option<i64>,
}

impl std::fmt::Debug for Debugger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Debugger")
            .field("pending", &self.session.pending())
            .field("snapshot", &self.snapshot)
            .field("exit_code", &self.exit_code)
            .finish()
    }
}

impl Debugger {
    pub fn new(session: impl DebugSession + 'static) -> Self {
        Debugger {
            session: Box::new(session),
            snapshot: None,
            selected_frame: None,
            exit_code: None,
        }
    }

    pub fn snapshot(&self) -> Option<&DebugSnapshot> {
        self.snapshot.as_ref()
    }

    pub fn pending(&self) -> usize {
        self.session.pending()
    }

    pub fn exit_code(&self) -> Option<i64> {
        self.exit_code
    }

    /// (thread index, frame index) of the selected frame.
    pub fn selected_frame(&self) -> Option<(usize, usize)> {
        self.selected_frame
    }

    pub fn select_frame(&mut self, thread: usize, frame: usize) -> bool {
        let ok = self
            .snapshot
            .as_ref()
            .and_then(|s| s.threads.get(thread))
            .is_some_and(|t| frame < t.frames.len());
        if ok {
            self.selected_frame = Some((thread, frame));
        }
        ok
    }

    /// Consumes one event. A stop installs the snapshot, counts a hit on
    /// its breakpoint and asks for the inline editor there; continue and
    /// exit clear the snapshot.
    pub fn step(&mut self, breakpoints: &mut BreakpointStore) -> Result<StepReport, DebugError> {
        let event = self.session.next_event().ok_or(DebugError::SessionExhausted)?;
        let report = match &event {
            DebugEvent::Stopped(snap) => {
                let stop = snap.stop_location();
                let hit = snap
                    .stopped_breakpoint
                    .and_then(|id| breakpoints.record_hit(id).cloned());
                let text = match (&hit, &stop) {
                    (Some(bp), _) => format!("Paused at breakpoint {} ({})", bp.id, bp.location()),
                    (None, Some(loc)) => format!("Paused at {loc}"),
                    (None, None) => "Paused".to_string(),
                };
                let mut message = Message::new(Category::Debug, text);
                if let Some(loc) = &stop {
                    message = message.with_action(ActionRef::JumpToLocation(loc.clone()));
                }
                self.selected_frame = snap.threads.first().map(|t| (0, t.frames.len() - 1));
                self.snapshot = Some(snap.clone());
                StepReport {
                    event: event.clone(),
                    mode_cause: ModeCause::DebugPaused,
                    message,
                    editor_at: hit.map(|bp| bp.location()),
                }
            }
            DebugEvent::Continued => {
                self.clear();
                StepReport {
                    event: event.clone(),
                    mode_cause: ModeCause::DebugResumed,
                    message: Message::new(Category::Debug, "Continued"),
                    editor_at: None,
                }
            }
            DebugEvent::Exited { code } => {
                self.clear();
                self.exit_code = Some(*code);
                StepReport {
                    event: event.clone(),
                    mode_cause: ModeCause::DebugResumed,
                    message: Message::new(Category::Debug, format!("Program exited with code {code}")),
                    editor_at: None,
                }
            }
        };
        Ok(report)
    }

    fn clear(&mut self) {
        self.snapshot = None;
        self.selected_frame = None;
    }

    /// Call-stack tree of the current snapshot plus the selected frame node.
    pub fn stack_view(&self) -> Option<(NavTree, NodeId)> {
        let snap = self.snapshot.as_ref()?;
        let tree = stack_tree(snap);
        let (t, f) = self.selected_frame?;
        let thread = tree.node(tree.root())?.children.get(t).copied()?;
        let mut node = thread;
        for _ in 0..=f {
            node = tree.node(node)?.children.first().copied()?;
        }
        Some((tree, node))
    }
}

/// Root → one node per thread → its frames as a chain, outermost frame
/// first.
pub fn stack_tree(snapshot: &DebugSnapshot) -> NavTree {
    let mut tree = NavTree::new(Mode::CallStack, "threads");
    for thread in &snapshot.threads {
        let mut parent = tree.add_child(tree.root(), thread.name.clone(), NodeKind::Thread, None, None);
        for frame in &thread.frames {
            parent = tree.add_child(
                parent,
                frame.function.clone(),
                NodeKind::Frame,
                Some(frame.location()),
                None,
            );
        }
    }
    tree
}

/// Read-only document with one `EXPR = VALUE` line per watch.
pub fn variables_document(snapshot: &DebugSnapshot) -> Document {
    Document {
        path: VARIABLES_DOCUMENT.to_string(),
        lines: snapshot
            .variables
            .iter()
            .map(|w| format!("{} = {}", w.expr, w.value))
            .collect(),
        language_hint: LanguageHint::Unknown,
        open_rank: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crumbs::{siblings, trail_for};

    const TRACE: &str = r#"{"ev":"stopped","bp":1,"threads":[{"id":1,"name":"main","frames":[{"fn":"main","file":"a.c","line":30},{"fn":"f","file":"a.c","line":20},{"fn":"g","file":"a.c","line":12}]}],"vars":[{"expr":"x","value":"3"}],"extra":true}

{"ev":"exited","code":0}
"#;

    #[test]
    fn toggle_is_an_involution() {
        let mut store = BreakpointStore::default();
        let start = store.clone();
        store.toggle("a.c", 5);
        store.toggle("a.c", 5);
        assert_eq!(store.breakpoints, start.breakpoints);
        let Toggled::Added(bp) = store.toggle("a.c", 7) else {
            panic!()
        };
        assert!(bp.enabled);
        assert_eq!(bp.condition, None);
        store.toggle("b.c", 7);
        assert_eq!(store.len(), 2);
        assert_ne!(store.at("a.c", 7).unwrap().id, store.at("b.c", 7).unwrap().id);
    }

    #[test]
    fn ids_increase_monotonically() {
        let mut store = BreakpointStore::default();
        let Toggled::Added(a) = store.toggle("a.c", 1) else {
            panic!()
        };
        store.toggle("a.c", 1);
        let Toggled::Added(b) = store.toggle("a.c", 1) else {
            panic!()
        };
        assert!(b.id > a.id);
    }

    #[test]
    fn edit_breakpoint() {
        let mut store = BreakpointStore::default();
        let Toggled::Added(bp) = store.toggle("a.c", 3) else {
            panic!()
        };
        let e = store.edit(bp.id, Some("x > 3".into()), true).unwrap();
        assert_eq!(e.condition.as_deref(), Some("x > 3"));
        let e = store.edit(bp.id, Some("x > 3".into()), false).unwrap();
        assert!(!e.enabled);
        assert_eq!(store.len(), 1);
        assert_eq!(store.edit(999, None, true), Err(UnknownBreakpoint(999)));
    }

    #[test]
    fn validate_rejects_duplicates() {
        let mut store = BreakpointStore::default();
        store.toggle("a.c", 3);
        let mut dup = store.clone();
        let mut again = dup.breakpoints[0].clone();
        again.id = 9;
        dup.breakpoints.push(again);
        assert!(store.validate().is_ok());
        assert!(dup.validate().is_err());
    }

    #[test]
    fn parse_fixture_trace() {
        let session = TraceSession::parse(TRACE).unwrap();
        assert_eq!(session.pending(), 2);
        assert_eq!(TraceSession::parse("").unwrap().pending(), 0);
    }

    #[test]
    fn malformed_traces() {
        let cases = [
            (r#"{"bp":1}"#, 1, "ev"),
            ("{\"ev\":\"continued\"}\n{\"ev\":\"teleported\"}", 2, "teleported"),
            (
                r#"{"ev":"stopped","threads":[{"id":1,"name":"m","frames":[]}]}"#,
                1,
                "no frames",
            ),
            (r#"{"ev":"exited"}"#, 1, "code"),
            ("not json", 1, ""),
        ];
        for (text, line, needle) in cases {
            match TraceSession::parse(text) {
                Err(DebugError::MalformedTrace { line: l, reason }) => {
                    assert_eq!(l, line, "{text}");
                    assert!(reason.contains(needle), "{text}: {reason}");
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn stepping_reports_effects() {
        let mut store = BreakpointStore::default();
        store.toggle("a.c", 12);
        let mut dbg = Debugger::new(TraceSession::parse(TRACE).unwrap());
        let r = dbg.step(&mut store).unwrap();
        assert_eq!(r.mode_cause, ModeCause::DebugPaused);
        assert_eq!(r.editor_at, Some(Location::new("a.c", 12)));
        assert_eq!(store.get(1).unwrap().hit_count, 1);
        let snap = dbg.snapshot().unwrap();
        assert_eq!(snap.threads[0].name, "main");
        assert_eq!(snap.stop_location(), Some(Location::new("a.c", 12)));
        let (tree, sel) = dbg.stack_view().unwrap();
        let trail = trail_for(&tree, sel).unwrap();
        assert_eq!(
            trail.blocks.iter().map(|b| b.label.as_str()).collect::<Vec<_>>(),
            ["main", "g"]
        );
        assert_eq!(siblings(&tree, sel, &[]).unwrap().len(), 3);
        assert_eq!(variables_document(snap).lines, ["x = 3"]);

        let r = dbg.step(&mut store).unwrap();
        assert_eq!(r.mode_cause, ModeCause::DebugResumed);
        assert!(dbg.snapshot().is_none());
        assert_eq!(dbg.exit_code(), Some(0));
        assert!(matches!(dbg.step(&mut store), Err(DebugError::SessionExhausted)));
    }

    #[test]
    fn stack_tree_shape() {
        let frame = |f: &str, l| Frame {
            function: f.into(),
            file: "a.c".into(),
            line: l,
        };
        let snap = DebugSnapshot {
            threads: vec![
                ThreadState {
                    id: 1,
                    name: "main".into(),
                    frames: vec![frame("main", 1), frame("f", 2), frame("g", 3)],
                },
                ThreadState {
                    id: 2,
                    name: "io".into(),
                    frames: vec![frame("loop", 9)],
                },
            ],
            variables: vec![],
            stopped_breakpoint: None,
        };
        let tree = stack_tree(&snap);
        assert_eq!(tree.node(tree.root()).unwrap().children.len(), 2);
        let g = tree.find_by_labels("main/main/f/g").unwrap();
        assert_eq!(tree.path_to(g).unwrap().len(), 5);
        assert!(variables_document(&snap).lines.is_empty());
    }
}
