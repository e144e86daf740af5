//! Headless engine for a single-window IDE shell.
//!
//! Every workflow that a classic IDE routes through a dockable tool view is
//! modeled here as state feeding three surfaces: a multi-mode breadcrumbs bar
//! ([`crumbs`]), an enhanced status bar ([`statusbar`]), and inline editor
//! widgets ([`inline`]). The [`Engine`] owns the mutable state and is driven by
//! frontends (the `solowin` CLI, or a terminal UI).

pub mod buildrun;
pub mod crumbs;
pub mod debugmodel;
pub mod diagnostics;
pub mod engine;
pub mod inline;
pub mod lexer;
pub mod statusbar;
pub mod symbols;
pub mod workspace;

pub use engine::{Engine, EngineError};

/// A position in a workspace document, 1-based line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Location {
    pub file: String,
    pub line: usize,
}

impl Location {
    pub fn new(file: impl Into<String>, line: usize) -> Self {
        Self {
            file: file.into(),
            line,
        }
    }
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}
