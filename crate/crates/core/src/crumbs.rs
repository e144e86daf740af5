//! Multi-mode breadcrumbs: navigation trees, trails, sibling popups,
//! aggregated marks and the mode state machine.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use thiserror::Error;

use crate::Location;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    FileSystem,
    Project,
    CodeObjects,
    CallStack,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::FileSystem, Mode::Project, Mode::CodeObjects, Mode::CallStack];

    pub fn name(self) -> &'static str {
        match self {
            Mode::FileSystem => "filesystem",
            Mode::Project => "project",
            Mode::CodeObjects => "codeobjects",
            Mode::CallStack => "callstack",
        }
    }

    /// Manual cycling order used by frontends.
    pub fn next(self) -> Mode {
        match self {
            Mode::FileSystem => Mode::Project,
            Mode::Project => Mode::CodeObjects,
            Mode::CodeObjects => Mode::CallStack,
            Mode::CallStack => Mode::FileSystem,
        }
    }

    /// Whether the tree's root is shown as the first block.
    pub fn shows_root(self) -> bool {
        matches!(self, Mode::FileSystem | Mode::Project)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown mode {0:?} (expected fs, project, code or callstack)")]
pub struct UnknownMode(pub String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fs" | "filesystem" | "files" => Ok(Mode::FileSystem),
            "project" | "proj" => Ok(Mode::Project),
            "code" | "codeobjects" | "symbols" => Ok(Mode::CodeObjects),
            "callstack" | "stack" => Ok(Mode::CallStack),
            _ => Err(UnknownMode(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Root,
    Directory,
    Document,
    Class,
    Function,
    GlobalVariable,
    Macro,
    Thread,
    Frame,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Jump target for symbols and frames.
    pub location: Option<Location>,
    /// Workspace path for document nodes; mark facts are keyed by it.
    pub document: Option<String>,
}

/// An arena tree; parents always precede their children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NavTree {
    pub mode: Mode,
    nodes: Vec<Node>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrumbsError {
    #[error("node {0:?} not in tree")]
    NodeNotFound(NodeId),
    #[error("node {0:?} has no location and no children")]
    NoLocation(NodeId),
}

impl NavTree {
    pub fn new(mode: Mode, root_label: impl Into<String>) -> Self {
        NavTree {
            mode,
            nodes: vec![Node {
                id: NodeId(0),
                label: root_label.into(),
                kind: NodeKind::Root,
                parent: None,
                children: Vec::new(),
                location: None,
                document: None,
            }],
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0)
    }

    fn get(&self, id: NodeId) -> Result<&Node, CrumbsError> {
        self.node(id).ok_or(CrumbsError::NodeNotFound(id))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter()
    }

    pub fn add_child(
        &mut self,
        parent: NodeId,
        label: impl Into<String>,
        kind: NodeKind,
        location: Option<Location>,
        document: Option<String>,
    ) -> NodeId {
        assert!(parent.0 < self.nodes.len(), "parent must exist");
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            id,
            label: label.into(),
            kind,
            parent: Some(parent),
            children: Vec::new(),
            location,
            document,
        });
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Builds a directory tree from workspace-relative file paths. Children
    /// are sorted by label.
    pub fn from_paths<S: AsRef<str>>(mode: Mode, root_label: &str, paths: &[S]) -> Self {
        let mut tree = NavTree::new(mode, root_label);
        let mut dirs: BTreeMap<String, NodeId> = BTreeMap::new();
        for path in paths {
            let path = path.as_ref();
            let segs: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
            let Some((file, parents)) = segs.split_last() else {
                continue;
            };
            let mut parent = tree.root();
            let mut prefix = String::new();
            for dir in parents {
                if !prefix.is_empty() {
                    prefix.push('/');
                }
                prefix.push_str(dir);
                parent = match dirs.get(&prefix) {
                    Some(&id) => id,
                    None => {
                        let id = tree.add_child(parent, *dir, NodeKind::Directory, None, None);
                        dirs.insert(prefix.clone(), id);
                        id
                    }
                };
            }
            tree.add_child(parent, *file, NodeKind::Document, None, Some(path.to_string()));
        }
        tree.sort_children_by_label();
        tree
    }

    fn sort_children_by_label(&mut self) {
        let labels: Vec<String> = self.nodes.iter().map(|n| n.label.clone()).collect();
        for node in &mut self.nodes {
            node.children.sort_by(|a, b| labels[a.0].cmp(&labels[b.0]));
        }
    }

    /// Root-first path to `id`.
    pub fn path_to(&self, id: NodeId) -> Result<Vec<NodeId>, CrumbsError> {
        let mut cur = Some(self.get(id)?.id);
        let mut path = Vec::new();
        while let Some(c) = cur {
            path.push(c);
            cur = self.nodes[c.0].parent;
        }
        path.reverse();
        Ok(path)
    }

    pub fn find_document(&self, path: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Document && n.document.as_deref() == Some(path))
            .map(|n| n.id)
    }

    /// Resolves a `/`-separated label path below the root (`""` is the root).
    pub fn find_by_labels(&self, path: &str) -> Option<NodeId> {
        let mut cur = self.root();
        for seg in path.split('/').filter(|s| !s.is_empty()) {
            cur = *self.nodes[cur.0]
                .children
                .iter()
                .find(|c| self.nodes[c.0].label == seg)?;
        }
        Some(cur)
    }
}

/// Per-node counts shown as dots (with optional numbers) on blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Marks {
    pub errors: usize,
    pub warnings: usize,
    pub tasks: usize,
    pub breakpoints: usize,
}

impl Marks {
    pub fn is_zero(&self) -> bool {
        *self == Marks::default()
    }
}

impl Add for Marks {
    type Output = Marks;

    fn add(self, o: Marks) -> Marks {
        Marks {
            errors: self.errors + o.errors,
            warnings: self.warnings + o.warnings,
            tasks: self.tasks + o.tasks,
            breakpoints: self.breakpoints + o.breakpoints,
        }
    }
}

impl AddAssign for Marks {
    fn add_assign(&mut self, o: Marks) {
        *self = *self + o;
    }
}

impl fmt::Display for Marks {
    /// `E2 W1 T1 B3`, omitting zero categories.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [
            ('E', self.errors),
            ('W', self.warnings),
            ('T', self.tasks),
            ('B', self.breakpoints),
        ];
        let mut first = true;
        for (sigil, n) in parts {
            if n > 0 {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{sigil}{n}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Which mark categories are displayed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MarkToggles {
    pub errors: bool,
    pub warnings: bool,
    pub tasks: bool,
    pub breakpoints: bool,
}

impl Default for MarkToggles {
    fn default() -> Self {
        MarkToggles {
            errors: true,
            warnings: true,
            tasks: true,
            breakpoints: true,
        }
    }
}

impl MarkToggles {
    pub fn apply(&self, m: Marks) -> Marks {
        Marks {
            errors: if self.errors { m.errors } else { 0 },
            warnings: if self.warnings { m.warnings } else { 0 },
            tasks: if self.tasks { m.tasks } else { 0 },
            breakpoints: if self.breakpoints { m.breakpoints } else { 0 },
        }
    }
}

/// Per-document counts keyed by workspace path.
pub type Facts = BTreeMap<String, Marks>;

/// Sum of the facts of every document in the subtree rooted at `node`.
pub fn marks_for(tree: &NavTree, node: NodeId, facts: &Facts) -> Marks {
    let Some(start) = tree.node(node) else {
        return Marks::default();
    };
    let mut total = Marks::default();
    let mut stack = vec![start.id];
    while let Some(id) = stack.pop() {
        let n = &tree.nodes[id.0];
        if let Some(m) = n.document.as_ref().and_then(|d| facts.get(d)) {
            total += *m;
        }
        stack.extend(n.children.iter().copied());
    }
    total
}

/// Marks for every node, indexed by `NodeId`, in one pass.
pub fn all_marks(tree: &NavTree, facts: &Facts) -> Vec<Marks> {
    let mut out: Vec<Marks> = tree
        .nodes
        .iter()
        .map(|n| {
            n.document
                .as_ref()
                .and_then(|d| facts.get(d))
                .copied()
                .unwrap_or_default()
        })
        .collect();
    for id in (1..out.len()).rev() {
        if let Some(p) = tree.nodes[id].parent {
            let m = out[id];
            out[p.0] += m;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub node: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub marks: Marks,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreadcrumbTrail {
    pub mode: Mode,
    pub blocks: Vec<Block>,
}

impl BreadcrumbTrail {
    /// Fills in block marks from per-document facts.
    pub fn with_marks(mut self, tree: &NavTree, facts: &Facts) -> Self {
        for b in &mut self.blocks {
            b.marks = marks_for(tree, b.node, facts);
        }
        self
    }
}

/// The blocks from the root to `node`.
///
/// In FileSystem and Project mode this is exactly the root→node path. Code
/// objects start at the document (the synthetic root is hidden); the call
/// stack shows the thread followed by the selected frame only.
pub fn trail_for(tree: &NavTree, node: NodeId) -> Result<BreadcrumbTrail, CrumbsError> {
    let mut path = tree.path_to(node)?;
    if !tree.mode.shows_root() {
        path.remove(0);
    }
    if tree.mode == Mode::CallStack && path.len() > 2 {
        path = vec![path[0], *path.last().unwrap()];
    }
    let blocks = path
        .into_iter()
        .map(|id| {
            let n = &tree.nodes[id.0];
            Block {
                node: id,
                label: n.label.clone(),
                kind: n.kind,
                marks: Marks::default(),
            }
        })
        .collect();
    Ok(BreadcrumbTrail {
        mode: tree.mode,
        blocks,
    })
}

/// Entries of the popup opened on `node`'s block.
///
/// Directory-like modes list the parent's children with open documents first
/// (in `open_order`) and the rest alphabetically. A frame block lists the
/// whole frame chain of its thread, outermost first.
pub fn siblings(tree: &NavTree, node: NodeId, open_order: &[String]) -> Result<Vec<NodeId>, CrumbsError> {
    let n = tree.get(node)?;
    let Some(parent) = n.parent else {
        return Ok(vec![node]);
    };
    if tree.mode == Mode::CallStack && n.kind == NodeKind::Frame {
        let path = tree.path_to(node)?;
        let thread = path[1];
        let mut chain = Vec::new();
        let mut cur = tree.nodes[thread.0].children.first().copied();
        while let Some(c) = cur {
            chain.push(c);
            cur = tree.nodes[c.0].children.first().copied();
        }
        return Ok(chain);
    }
    let children = &tree.nodes[parent.0].children;
    match tree.mode {
        Mode::FileSystem | Mode::Project => {
            let rank = |id: &NodeId| {
                tree.nodes[id.0]
                    .document
                    .as_ref()
                    .and_then(|d| open_order.iter().position(|o| o == d))
            };
            let mut open: Vec<(usize, NodeId)> = children.iter().filter_map(|c| rank(c).map(|r| (r, *c))).collect();
            open.sort();
            let mut rest: Vec<NodeId> = children.iter().filter(|c| rank(c).is_none()).copied().collect();
            rest.sort_by(|a, b| tree.nodes[a.0].label.cmp(&tree.nodes[b.0].label));
            Ok(open.into_iter().map(|(_, id)| id).chain(rest).collect())
        }
        Mode::CodeObjects | Mode::CallStack => Ok(children.clone()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NavCommand {
    OpenDocument(String),
    OpenAt(Location),
    /// Show the node's children in a nested popup; the editor is unchanged.
    Descend(NodeId),
}

pub fn navigate(tree: &NavTree, node: NodeId) -> Result<NavCommand, CrumbsError> {
    let n = tree.get(node)?;
    if n.kind == NodeKind::Document {
        if let Some(doc) = &n.document {
            return Ok(NavCommand::OpenDocument(doc.clone()));
        }
    }
    if let Some(loc) = &n.location {
        return Ok(NavCommand::OpenAt(loc.clone()));
    }
    if !n.children.is_empty() {
        return Ok(NavCommand::Descend(node));
    }
    Err(CrumbsError::NoLocation(node))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeCause {
    Manual(Mode),
    DebugPaused,
    DebugResumed,
}

/// Active breadcrumb mode with debug auto-switching.
///
/// A pause forces [`Mode::CallStack`] and remembers the mode in use before
/// it; resuming restores that mode. A manual selection while paused takes
/// effect immediately and lasts until the next pause or resume.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeMachine {
    active: Mode,
    before_pause: Option<Mode>,
}

impl Default for ModeMachine {
    fn default() -> Self {
        ModeMachine::new(Mode::FileSystem)
    }
}

impl ModeMachine {
    pub fn new(initial: Mode) -> Self {
        ModeMachine {
            active: initial,
            before_pause: None,
        }
    }

    pub fn active(&self) -> Mode {
        self.active
    }

    pub fn is_paused(&self) -> bool {
        self.before_pause.is_some()
    }

    pub fn set_mode(&mut self, cause: ModeCause) -> Mode {
        match cause {
            ModeCause::Manual(m) => self.active = m,
            ModeCause::DebugPaused => {
                if self.before_pause.is_none() {
                    self.before_pause = Some(self.active);
                }
                self.active = Mode::CallStack;
            }
            ModeCause::DebugResumed => {
                if let Some(prev) = self.before_pause.take() {
                    self.active = prev;
                }
            }
        }
        self.active
    }
}
