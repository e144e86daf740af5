//! The owning event-loop context: project state plus every operation a
//! frontend can trigger.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::buildrun::{start_build, BuildError, BuildEvent, BuildOutcome};
use crate::crumbs::{
    self, BreadcrumbTrail, CrumbsError, Facts, Marks, Mode, ModeCause, ModeMachine, NavTree, NodeId, NodeKind,
};
use crate::debugmodel::{
    load_trace, variables_document, BreakpointStore, DebugError, DebugSession, Debugger, StepReport, Toggled,
    UnknownBreakpoint,
};
use crate::diagnostics::{cycle_errors, Diagnostic, Direction, IgnoreStore, NoErrors, WarningFingerprint};
use crate::inline::{
    compute_decorations, compute_widgets, AnnotationState, InlineWidget, LineDecoration, NoWarningHere,
};
use crate::statusbar::{
    refresh_widgets, vcs_changed_count, ActionRef, Category, Feed, Message, StaticWidget, StatusbarLayout, Toggles,
    WidgetState,
};
use crate::symbols::{build_code_tree, index_file, scan_tasks, symbol_at_line, Symbol, Task, UnsupportedLanguage};
use crate::workspace::{
    list_files, load_project, load_store, save_store, Document, LanguageHint, ProjectConfig, Workspace, WorkspaceError,
};
use crate::Location;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Debug(#[from] DebugError),
    #[error(transparent)]
    Crumbs(#[from] CrumbsError),
    #[error(transparent)]
    Symbols(#[from] UnsupportedLanguage),
    #[error(transparent)]
    NoWarningHere(#[from] NoWarningHere),
    #[error(transparent)]
    UnknownBreakpoint(#[from] UnknownBreakpoint),
    #[error(transparent)]
    NoErrors(#[from] NoErrors),
    #[error("debugging is not paused")]
    NotPaused,
    #[error("no such node: {0}")]
    UnknownTarget(String),
    #[error("unknown toggle: {0}")]
    UnknownToggle(String),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

/// Label of the FileSystem/Project root block.
pub const ROOT_LABEL: &str = "root";

#[derive(Debug)]
pub struct Engine {
    config: ProjectConfig,
    workspace: Workspace,
    ignores: IgnoreStore,
    breakpoints: BreakpointStore,
    layout: StatusbarLayout,
    annotations: AnnotationState,
    last_build: Option<BuildOutcome>,
    modes: ModeMachine,
    feed: Feed,
    debugger: Option<Debugger>,
    current_error: Option<usize>,
    vcs_changed: Option<usize>,
}

impl Engine {
    /// Loads the project at `root` with its stores. `deterministic` makes
    /// feed timestamps a plain counter.
    pub fn open(root: &Path, deterministic: bool) -> Result<Self> {
        let config = load_project(root)?;
        let root = config.root.clone();
        let ignores: IgnoreStore = load_store(&root)?;
        let breakpoints: BreakpointStore = load_store(&root)?;
        breakpoints
            .validate()
            .map_err(|message| WorkspaceError::MalformedConfig {
                file: "breakpoints.json".into(),
                message,
            })?;
        let layout: StatusbarLayout = load_store(&root)?;
        let annotations = AnnotationState {
            toggles: Toggles::from_map(&layout.toggles),
            ..AnnotationState::default()
        };
        let mut engine = Engine {
            workspace: Workspace::new(&root),
            config,
            ignores,
            breakpoints,
            layout,
            annotations,
            last_build: None,
            modes: ModeMachine::default(),
            feed: if deterministic {
                Feed::deterministic()
            } else {
                Feed::new()
            },
            debugger: None,
            current_error: None,
            vcs_changed: None,
        };
        engine.rescan_tasks()?;
        Ok(engine)
    }

    pub fn root(&self) -> &Path {
        &self.config.root
    }

    pub fn config(&self) -> &ProjectConfig {
        &self.config
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn annotations(&self) -> &AnnotationState {
        &self.annotations
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.annotations.diagnostics
    }

    pub fn tasks(&self) -> &[Task] {
        &self.annotations.tasks
    }

    pub fn last_build(&self) -> Option<&BuildOutcome> {
        self.last_build.as_ref()
    }

    pub fn breakpoints(&self) -> &BreakpointStore {
        &self.breakpoints
    }

    pub fn ignores(&self) -> &IgnoreStore {
        &self.ignores
    }

    pub fn feed(&self) -> &Feed {
        &self.feed
    }

    pub fn toggles(&self) -> Toggles {
        self.annotations.toggles
    }

    pub fn mode(&self) -> Mode {
        self.modes.active()
    }

    pub fn debugger(&self) -> Option<&Debugger> {
        self.debugger.as_ref()
    }

    pub fn open_document(&mut self, path: &str) -> Result<&Document> {
        Ok(self.workspace.open_document(path)?)
    }

    pub fn focus(&mut self, path: &str) -> Result<()> {
        Ok(self.workspace.focus(path)?)
    }

    /// A document's current text: the open copy, else the file on disk.
    pub fn document(&self, path: &str) -> Result<Document> {
        let rel = self.workspace.resolve(path)?;
        Ok(self.workspace.peek_document(&rel)?)
    }

    pub fn symbols(&self, path: &str) -> Result<Vec<Symbol>> {
        Ok(index_file(&self.document(path)?)?)
    }

    /// Files shown in FileSystem mode.
    pub fn project_files(&self) -> Result<Vec<String>> {
        Ok(list_files(self.root(), self.config.show_hidden)?)
    }

    /// Files shown in Project mode.
    pub fn source_files(&self) -> Result<Vec<String>> {
        Ok(self
            .project_files()?
            .into_iter()
            .filter(|p| self.config.is_source_file(p))
            .collect())
    }

    /// Rescans every C-like project file for task comments.
    pub fn rescan_tasks(&mut self) -> Result<usize> {
        let mut tasks = Vec::new();
        for path in self.project_files()? {
            if LanguageHint::for_path(&path) != LanguageHint::CLike {
                continue;
            }
            let doc = self.workspace.peek_document(&path)?;
            tasks.extend(scan_tasks(&doc, &self.config.task_keywords));
        }
        self.annotations.tasks = tasks;
        Ok(self.annotations.tasks.len())
    }

    /// Runs the configured build to completion.
    pub fn build(&mut self) -> Result<BuildOutcome> {
        self.build_with(|_| {})
    }

    /// Runs the build, handing each event to `on_event` as it arrives.
    /// Diagnostics and inline state are replaced when the build finishes.
    pub fn build_with(&mut self, mut on_event: impl FnMut(&BuildEvent)) -> Result<BuildOutcome> {
        let session = start_build(&self.config.build_command, self.root(), self.ignores.clone())?;
        while let Some(ev) = session.next_event() {
            if ev == BuildEvent::Started {
                self.feed.push(Message::new(Category::Build, "Build started"));
            }
            on_event(&ev);
            if matches!(ev, BuildEvent::Finished { .. }) {
                break;
            }
        }
        let outcome = session.wait();
        self.annotations.diagnostics = outcome.diagnostics.clone();
        self.annotations.expanded = None;
        self.current_error = None;
        let text = format!(
            "Build finished (exit {}): {} error(s), {} warning(s)",
            outcome.exit_code, outcome.error_count, outcome.warning_count
        );
        let msg = Message::new(Category::Build, text);
        self.feed.push(if outcome.error_count > 0 {
            msg.with_action(ActionRef::JumpToFirstError)
        } else {
            msg
        });
        self.last_build = Some(outcome.clone());
        Ok(outcome)
    }

    /// Moves the error cursor and returns where to jump.
    pub fn cycle_error(&mut self, direction: Direction) -> Result<Location> {
        let current = self.current_error.unwrap_or(usize::MAX);
        let next = cycle_errors(&self.annotations.diagnostics, current, direction)?;
        self.current_error = Some(next.seq);
        Ok(next.location())
    }

    pub fn first_error_location(&mut self) -> Option<Location> {
        let first = self.annotations.first_error()?;
        self.current_error = Some(first.seq);
        Some(first.location())
    }

    pub fn expand_warning(&mut self, file: &str, line: usize) -> Result<&Diagnostic> {
        Ok(self.annotations.expand_warning(file, line)?)
    }

    /// The `IgnoreWarning` action on the expanded warning; persists the
    /// ignore store.
    pub fn ignore_expanded_warning(&mut self) -> Result<Option<WarningFingerprint>> {
        let fp = self.annotations.ignore_expanded(&mut self.ignores);
        if fp.is_some() {
            save_store(self.root(), &self.ignores)?;
        }
        Ok(fp)
    }

    pub fn toggle_breakpoint(&mut self, file: &str, line: usize) -> Result<Toggled> {
        let rel = self.workspace.resolve(file)?;
        if !self.workspace.is_open(&rel) {
            self.workspace.open_document(&rel)?;
        }
        let t = self.breakpoints.toggle(&rel, line);
        save_store(self.root(), &self.breakpoints)?;
        Ok(t)
    }

    pub fn edit_breakpoint(&mut self, id: u64, condition: Option<String>, enabled: bool) -> Result<()> {
        let bp = self.breakpoints.edit(id, condition, enabled)?;
        if self.annotations.paused_at.as_ref().is_some_and(|p| p.id == id) {
            self.annotations.paused_at = Some(bp);
        }
        save_store(self.root(), &self.breakpoints)?;
        Ok(())
    }

    /// Starts replaying a trace file. Hit counts restart from zero; they
    /// are session state and are not written back.
    pub fn load_trace(&mut self, path: &Path) -> Result<()> {
        let session = load_trace(path)?;
        self.attach_session(session);
        Ok(())
    }

    pub fn attach_session(&mut self, session: impl DebugSession + 'static) {
        self.breakpoints.reset_hits();
        if self.modes.is_paused() {
            self.modes.set_mode(ModeCause::DebugResumed);
        }
        self.annotations.paused_at = None;
        self.debugger = Some(Debugger::new(session));
    }

    /// Consumes one debugger event and applies its effects: mode switch,
    /// feed message, inline breakpoint editor.
    pub fn step_debug(&mut self) -> Result<StepReport> {
        let dbg = self.debugger.as_mut().ok_or(DebugError::NoSession)?;
        let report = dbg.step(&mut self.breakpoints)?;
        self.modes.set_mode(report.mode_cause);
        self.feed.push(report.message.clone());
        self.annotations.paused_at = report
            .editor_at
            .as_ref()
            .and_then(|loc| self.breakpoints.at(&loc.file, loc.line).cloned());
        Ok(report)
    }

    /// Selects a frame of the paused snapshot for the CallStack trail.
    pub fn select_frame(&mut self, thread: usize, frame: usize) -> bool {
        self.debugger.as_mut().is_some_and(|d| d.select_frame(thread, frame))
    }

    pub fn set_mode(&mut self, cause: ModeCause) -> Mode {
        self.modes.set_mode(cause)
    }

    pub fn variables(&self) -> Option<Document> {
        self.debugger.as_ref()?.snapshot().map(variables_document)
    }

    /// Per-document mark counts with display toggles applied.
    pub fn facts(&self) -> Facts {
        let mut facts = Facts::new();
        for d in &self.annotations.diagnostics {
            let m = facts.entry(d.file.clone()).or_default();
            if d.is_error() {
                m.errors += 1;
            } else if d.is_warning() {
                m.warnings += 1;
            }
        }
        for t in &self.annotations.tasks {
            facts.entry(t.file.clone()).or_default().tasks += 1;
        }
        for (file, n) in self.breakpoints.per_file() {
            facts.entry(file).or_default().breakpoints += n;
        }
        let toggles = self.annotations.toggles.marks;
        facts.values_mut().for_each(|m| *m = toggles.apply(*m));
        facts.retain(|_, m| !m.is_zero());
        facts
    }

    /// The navigation tree for `mode`. CallStack needs a paused session.
    pub fn tree(&self, mode: Mode) -> Result<NavTree> {
        Ok(match mode {
            Mode::FileSystem => NavTree::from_paths(mode, ROOT_LABEL, &self.project_files()?),
            Mode::Project => NavTree::from_paths(mode, ROOT_LABEL, &self.source_files()?),
            Mode::CodeObjects => {
                let docs = self
                    .source_files()?
                    .iter()
                    .map(|p| self.document(p))
                    .collect::<Result<Vec<_>>>()?;
                build_code_tree(&docs)
            }
            Mode::CallStack => self.stack_view().ok_or(EngineError::NotPaused)?.0,
        })
    }

    fn stack_view(&self) -> Option<(NavTree, NodeId)> {
        self.debugger.as_ref()?.stack_view()
    }

    /// Resolves a target to a node.
    ///
    /// FileSystem/Project: a path (`""` is the root). CodeObjects: `FILE`,
    /// `FILE#NAME` (a symbol by name) or `FILE:LINE` (the symbol declared at
    /// or above the line). CallStack: `""` for the selected frame or a
    /// function name in the first thread.
    pub fn resolve_target(&self, tree: &NavTree, target: &str) -> Result<NodeId> {
        let unknown = || EngineError::UnknownTarget(target.to_string());
        match tree.mode {
            Mode::FileSystem | Mode::Project => {
                let rel = if target.is_empty() {
                    String::new()
                } else {
                    self.workspace.resolve(target)?
                };
                tree.find_by_labels(&rel).ok_or_else(unknown)
            }
            Mode::CodeObjects => {
                if let Some((file, name)) = target.split_once('#') {
                    let doc = tree.find_document(&self.workspace.resolve(file)?).ok_or_else(unknown)?;
                    let mut stack = vec![doc];
                    while let Some(id) = stack.pop() {
                        let n = tree.node(id).ok_or_else(unknown)?;
                        if n.kind != NodeKind::Document && n.label == name {
                            return Ok(id);
                        }
                        stack.extend(n.children.iter().rev());
                    }
                    return Err(unknown());
                }
                if let Some((file, line)) = target.rsplit_once(':').and_then(|(f, l)| Some((f, l.parse().ok()?))) {
                    let doc = tree.find_document(&self.workspace.resolve(file)?).ok_or_else(unknown)?;
                    return Ok(symbol_at_line(tree, doc, line).unwrap_or(doc));
                }
                tree.find_document(&self.workspace.resolve(target)?).ok_or_else(unknown)
            }
            Mode::CallStack => {
                let (_, selected) = self.stack_view().ok_or(EngineError::NotPaused)?;
                if target.is_empty() {
                    return Ok(selected);
                }
                tree.nodes()
                    .find(|n| n.kind == NodeKind::Frame && n.label == target)
                    .map(|n| n.id)
                    .ok_or_else(unknown)
            }
        }
    }

    /// Trail for `target` in `mode`, blocks carrying marks.
    pub fn trail(&self, mode: Mode, target: &str) -> Result<BreadcrumbTrail> {
        let tree = self.tree(mode)?;
        let node = self.resolve_target(&tree, target)?;
        Ok(crumbs::trail_for(&tree, node)?.with_marks(&tree, &self.facts()))
    }

    /// Popup entries for a block, with their marks.
    pub fn popup(&self, tree: &NavTree, node: NodeId) -> Result<Vec<(NodeId, Marks)>> {
        let open = self.workspace.recent_open_order();
        let facts = self.facts();
        Ok(crumbs::siblings(tree, node, &open)?
            .into_iter()
            .map(|id| (id, crumbs::marks_for(tree, id, &facts)))
            .collect())
    }

    /// Re-runs the VCS provider; a failure hides the widget and is posted
    /// to the feed.
    pub fn refresh_vcs(&mut self) -> Option<usize> {
        self.vcs_changed = match vcs_changed_count(self.config.vcs_status_command.as_deref(), self.root()) {
            Ok(n) => n,
            Err(e) => {
                self.feed.push(Message::new(Category::Vcs, e.to_string()));
                None
            }
        };
        self.vcs_changed
    }

    pub fn widget_state(&self) -> WidgetState {
        WidgetState {
            errors: self.last_build.as_ref().map_or(0, |b| b.error_count),
            tasks: self.annotations.tasks.len(),
            first_task: self.annotations.tasks.first().map(Task::location),
            vcs_changed: self.vcs_changed,
        }
    }

    pub fn widget_order(&self) -> &[String] {
        if self.layout.widgets.is_empty() {
            &self.config.status_widgets
        } else {
            &self.layout.widgets
        }
    }

    pub fn status_widgets(&self) -> Vec<StaticWidget> {
        refresh_widgets(self.widget_order(), &self.widget_state())
    }

    /// Flips a display toggle and persists the status bar layout.
    pub fn flip_toggle(&mut self, id: &str) -> Result<bool> {
        let v = self
            .annotations
            .toggles
            .flip(id)
            .ok_or_else(|| EngineError::UnknownToggle(id.to_string()))?;
        self.layout.toggles = self.annotations.toggles.to_map();
        save_store(self.root(), &self.layout)?;
        Ok(v)
    }

    pub fn widgets_for(&self, path: &str) -> Result<Vec<InlineWidget>> {
        Ok(compute_widgets(&self.annotations, &self.document(path)?))
    }

    pub fn decorations_for(&self, path: &str) -> Result<Vec<LineDecoration>> {
        Ok(compute_decorations(&self.annotations, &self.document(path)?))
    }

    pub fn root_path(&self) -> PathBuf {
        self.config.root.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn project(build: &str) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("src")).unwrap();
        fs::create_dir_all(dir.path().join(".solowin")).unwrap();
        fs::write(
            dir.path().join("src/a.c"),
            "int g;\n// TODO one\nint main() {\n  return 0;\n}\n",
        )
        .unwrap();
        fs::write(dir.path().join("src/b.c"), "/* FIXME two */\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "TODO not scanned\n").unwrap();
        let cfg = serde_json::json!({"version": 1, "build_command": ["sh", "-c", build]});
        fs::write(dir.path().join(".solowin/project.json"), cfg.to_string()).unwrap();
        dir
    }

    #[test]
    fn build_feeds_widgets_and_marks() {
        let dir =
            project("echo 'src/a.c:3:1: error: e1'; echo 'src/a.c:4: error: e2'; echo 'src/b.c:1: warning: w'; exit 1");
        let mut eng = Engine::open(dir.path(), true).unwrap();
        assert_eq!(eng.tasks().len(), 2);
        let out = eng.build().unwrap();
        assert_eq!((out.exit_code, out.error_count, out.warning_count), (1, 2, 1));
        let ws = eng.status_widgets();
        assert_eq!(ws[0].id, "errors");
        assert_eq!(ws[0].text, "2");
        assert_eq!(ws[1].text, "2");
        let trail = eng.trail(Mode::FileSystem, "src/a.c").unwrap();
        assert_eq!(
            trail.blocks[1].marks,
            Marks {
                errors: 2,
                warnings: 1,
                tasks: 2,
                breakpoints: 0
            }
        );
        assert_eq!(eng.feed().current().unwrap().action, Some(ActionRef::JumpToFirstError));
        assert_eq!(eng.first_error_location(), Some(Location::new("src/a.c", 3)));
        assert_eq!(eng.cycle_error(Direction::Next).unwrap().line, 4);
        assert_eq!(eng.cycle_error(Direction::Next).unwrap().line, 3);
    }

    #[test]
    fn ignore_persists() {
        let dir = project("echo 'src/b.c:1: warning: w'");
        let mut eng = Engine::open(dir.path(), true).unwrap();
        eng.build().unwrap();
        eng.expand_warning("src/b.c", 1).unwrap();
        eng.ignore_expanded_warning().unwrap().unwrap();
        let mut again = Engine::open(dir.path(), true).unwrap();
        assert_eq!(again.build().unwrap().warning_count, 0);
    }

    #[test]
    fn toggles_persist() {
        let dir = project("true");
        let mut eng = Engine::open(dir.path(), true).unwrap();
        assert!(!eng.flip_toggle("marks.tasks").unwrap());
        assert!(eng.facts().is_empty());
        let again = Engine::open(dir.path(), true).unwrap();
        assert!(!again.toggles().marks.tasks);
        assert!(matches!(eng.flip_toggle("bogus"), Err(EngineError::UnknownToggle(_))));
    }

    #[test]
    fn breakpoints_persist_and_mark() {
        let dir = project("true");
        let mut eng = Engine::open(dir.path(), true).unwrap();
        let Toggled::Added(bp) = eng.toggle_breakpoint("src/a.c", 3).unwrap() else {
            panic!()
        };
        eng.edit_breakpoint(bp.id, Some("x > 3".into()), true).unwrap();
        let again = Engine::open(dir.path(), true).unwrap();
        assert_eq!(
            again.breakpoints().get(bp.id).unwrap().condition.as_deref(),
            Some("x > 3")
        );
        assert_eq!(again.facts()["src/a.c"].breakpoints, 1);
        assert!(matches!(
            eng.edit_breakpoint(99, None, true),
            Err(EngineError::UnknownBreakpoint(_))
        ));
    }

    #[test]
    fn code_object_targets() {
        let dir = project("true");
        let eng = Engine::open(dir.path(), true).unwrap();
        let trail = eng.trail(Mode::CodeObjects, "src/a.c#main").unwrap();
        let labels: Vec<_> = trail.blocks.iter().map(|b| b.label.as_str()).collect();
        assert_eq!(labels, ["src/a.c", "main"]);
        let trail = eng.trail(Mode::CodeObjects, "src/a.c:4").unwrap();
        assert_eq!(trail.blocks.last().unwrap().label, "main");
        assert!(matches!(eng.trail(Mode::CallStack, ""), Err(EngineError::NotPaused)));
        assert!(matches!(
            eng.trail(Mode::FileSystem, "src/zz.c"),
            Err(EngineError::UnknownTarget(_))
        ));
    }

    #[test]
    fn missing_compiler() {
        let dir = project("true");
        fs::write(
            dir.path().join(".solowin/project.json"),
            r#"{"version":1,"build_command":["no-such-cc"]}"#,
        )
        .unwrap();
        let mut eng = Engine::open(dir.path(), true).unwrap();
        assert!(matches!(
            eng.build(),
            Err(EngineError::Build(BuildError::CommandNotFound(_)))
        ));
        assert!(eng.feed().is_empty());
    }
}
