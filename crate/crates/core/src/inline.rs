//! Between-lines widgets and line decorations for one document, computed
//! from engine state.

use thiserror::Error;

use crate::debugmodel::Breakpoint;
use crate::diagnostics::{apply_ignores, first_error, Diagnostic, Direction, IgnoreStore, WarningFingerprint};
use crate::statusbar::Toggles;
use crate::symbols::Task;
use crate::workspace::Document;
use crate::Location;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WidgetKind {
    FirstError,
    WarningDetail,
    TaskNav,
    BreakpointEditor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InlineAction {
    NextError,
    PrevError,
    IgnoreWarning,
    NextTask,
    PrevTask,
    SaveBreakpoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InlineWidget {
    /// The widget renders after this line.
    pub anchor: Location,
    pub kind: WidgetKind,
    pub content: String,
    pub actions: Vec<InlineAction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecorationStyle {
    ErrorHighlight,
    WarningUnderline,
    TaskMarkerInline,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineDecoration {
    pub file: String,
    pub line: usize,
    pub style: DecorationStyle,
}

/// Everything inline annotations depend on.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotationState {
    /// Diagnostics of the last build, ignores already applied.
    pub diagnostics: Vec<Diagnostic>,
    pub tasks: Vec<Task>,
    /// Breakpoint the debuggee is paused at.
    pub paused_at: Option<Breakpoint>,
    pub toggles: Toggles,
    /// `seq` of the one expanded warning.
    pub expanded: Option<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no warning at {0}")]
pub struct NoWarningHere(pub Location);

/// Maps a diagnostic line onto an existing line of `doc`.
fn clamp(doc: &Document, line: usize) -> Option<usize> {
    let n = doc.line_count();
    (n > 0).then(|| line.clamp(1, n))
}

impl AnnotationState {
    pub fn first_error(&self) -> Option<&Diagnostic> {
        first_error(&self.diagnostics)
    }

    pub fn expanded_warning(&self) -> Option<&Diagnostic> {
        let seq = self.expanded?;
        self.diagnostics.iter().find(|d| d.seq == seq && d.is_warning())
    }

    /// Expands the warning at (file, line), collapsing any other.
    pub fn expand_warning(&mut self, file: &str, line: usize) -> Result<&Diagnostic, NoWarningHere> {
        let seq = self
            .diagnostics
            .iter()
            .filter(|d| d.is_warning() && d.file == file && d.line == line)
            .map(|d| d.seq)
            .min()
            .ok_or_else(|| NoWarningHere(Location::new(file, line)))?;
        self.expanded = Some(seq);
        Ok(self.expanded_warning().expect("just expanded"))
    }

    pub fn collapse(&mut self) {
        self.expanded = None;
    }

    /// The `IgnoreWarning` action: records the expanded warning's
    /// fingerprint, hides every warning sharing it, and clears the
    /// expansion.
    pub fn ignore_expanded(&mut self, store: &mut IgnoreStore) -> Option<WarningFingerprint> {
        let fp = self.expanded_warning()?.fingerprint();
        store.insert(fp.clone());
        self.diagnostics = apply_ignores(&self.diagnostics, store);
        self.expanded = None;
        Some(fp)
    }

    /// Tasks in (file, line, column) order wrap around like errors. With no
    /// current task, `Next` yields the first and `Previous` the last.
    pub fn neighbour_task(&self, current: Option<&Task>, direction: Direction) -> Option<&Task> {
        let mut tasks: Vec<&Task> = self.tasks.iter().collect();
        tasks.sort_by(|a, b| (&a.file, a.line, a.column).cmp(&(&b.file, b.line, b.column)));
        let n = tasks.len();
        if n == 0 {
            return None;
        }
        let idx = match current.and_then(|c| tasks.iter().position(|t| *t == c)) {
            Some(i) => match direction {
                Direction::Next => (i + 1) % n,
                Direction::Previous => (i + n - 1) % n,
            },
            None => match direction {
                Direction::Next => 0,
                Direction::Previous => n - 1,
            },
        };
        Some(tasks[idx])
    }
}

/// Widgets for `doc`, ordered by anchor line then kind.
pub fn compute_widgets(state: &AnnotationState, doc: &Document) -> Vec<InlineWidget> {
    let file = doc.path.as_str();
    let mut out = Vec::new();
    if state.toggles.inline_widgets {
        if let Some(first) = state.first_error().filter(|d| d.file == file) {
            if let Some(line) = clamp(doc, first.line) {
                out.push(InlineWidget {
                    anchor: Location::new(file, line),
                    kind: WidgetKind::FirstError,
                    content: first.message.clone(),
                    actions: vec![InlineAction::PrevError, InlineAction::NextError],
                });
            }
        }
    }
    if let Some(w) = state.expanded_warning().filter(|d| d.file == file) {
        if let Some(line) = clamp(doc, w.line) {
            out.push(InlineWidget {
                anchor: Location::new(file, line),
                kind: WidgetKind::WarningDetail,
                content: w.message.clone(),
                actions: vec![InlineAction::IgnoreWarning],
            });
        }
    }
    if state.toggles.task_nav {
        for t in state.tasks.iter().filter(|t| t.file == file) {
            if let Some(line) = clamp(doc, t.line) {
                out.push(InlineWidget {
                    anchor: Location::new(file, line),
                    kind: WidgetKind::TaskNav,
                    content: t.keyword.clone(),
                    actions: vec![InlineAction::PrevTask, InlineAction::NextTask],
                });
            }
        }
    }
    if let Some(bp) = state.paused_at.as_ref().filter(|b| b.file == file) {
        if let Some(line) = clamp(doc, bp.line) {
            out.push(InlineWidget {
                anchor: Location::new(file, line),
                kind: WidgetKind::BreakpointEditor,
                content: format!(
                    "breakpoint {}: condition: {} | enabled: {} | hits: {}",
                    bp.id,
                    bp.condition.as_deref().unwrap_or("-"),
                    if bp.enabled { "yes" } else { "no" },
                    bp.hit_count
                ),
                actions: vec![InlineAction::SaveBreakpoint],
            });
        }
    }
    out.sort_by_key(|w| (w.anchor.line, w.kind));
    out
}

/// Decorations for `doc`, sorted by line. The line carrying the first-error
/// widget gets no extra highlight.
pub fn compute_decorations(state: &AnnotationState, doc: &Document) -> Vec<LineDecoration> {
    let file = doc.path.as_str();
    let widget_line = state
        .toggles
        .inline_widgets
        .then(|| state.first_error())
        .flatten()
        .filter(|d| d.file == file)
        .and_then(|d| clamp(doc, d.line));
    let mut out = Vec::new();
    for d in state.diagnostics.iter().filter(|d| d.file == file) {
        let Some(line) = clamp(doc, d.line) else { continue };
        let style = if d.is_error() {
            if Some(line) == widget_line {
                continue;
            }
            DecorationStyle::ErrorHighlight
        } else if d.is_warning() {
            DecorationStyle::WarningUnderline
        } else {
            continue;
        };
        out.push(LineDecoration {
            file: file.to_string(),
            line,
            style,
        });
    }
    for t in state.tasks.iter().filter(|t| t.file == file) {
        if let Some(line) = clamp(doc, t.line) {
            out.push(LineDecoration {
                file: file.to_string(),
                line,
                style: DecorationStyle::TaskMarkerInline,
            });
        }
    }
    out.sort_by_key(|d| (d.line, d.style));
    out.dedup();
    out
}
