//! Compiler output parsing, first-error selection, error cycling and the
//! ignore-forever warning store.
//!
//! Recognized line grammar:
//!
//! ```text
//! diagnostic = file ":" line [ ":" column ] ":" " " severity ":" " " message ;
//! file       = ? one or more characters, no ':', not starting with whitespace ? ;
//! line       = positive decimal integer ;
//! column     = positive decimal integer ;
//! severity   = "error" | "warning" | "note" ;   (* case-insensitive *)
//! message    = ? one or more characters ? ;
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::workspace::{normalize_path, Store};
use crate::Location;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    /// Position in the build output stream, dense from 0.
    pub seq: usize,
    pub severity: Severity,
    pub file: String,
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn is_warning(&self) -> bool {
        self.severity == Severity::Warning
    }

    pub fn location(&self) -> Location {
        Location::new(self.file.clone(), self.line)
    }

    pub fn fingerprint(&self) -> WarningFingerprint {
        WarningFingerprint {
            file: self.file.clone(),
            message: self.message.clone(),
        }
    }

    /// Reconstructs the output line this diagnostic was parsed from.
    pub fn render(&self) -> String {
        match self.column {
            Some(col) => format!(
                "{}:{}:{}: {}: {}",
                self.file, self.line, col, self.severity, self.message
            ),
            None => format!("{}:{}: {}: {}", self.file, self.line, self.severity, self.message),
        }
    }
}

fn grammar() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^([^:\s][^:]*):(\d+):(?:(\d+):)? ((?i:error|warning|note)): (.+)$").expect("valid grammar")
    })
}

/// Parses one output line. `seq` is left at 0; stream order is assigned by
/// [`parse_stream`].
pub fn parse_line(text: &str) -> Option<Diagnostic> {
    let text = text.strip_suffix('\r').unwrap_or(text);
    let caps = grammar().captures(text)?;
    let line: usize = caps[2].parse().ok().filter(|&l| l > 0)?;
    let column = match caps.get(3) {
        Some(c) => Some(c.as_str().parse::<usize>().ok().filter(|&c| c > 0)?),
        None => None,
    };
    let severity = match caps[4].to_ascii_lowercase().as_str() {
        "error" => Severity::Error,
        "warning" => Severity::Warning,
        _ => Severity::Note,
    };
    let file = normalize_path(&caps[1]).filter(|f| !f.is_empty())?;
    Some(Diagnostic {
        seq: 0,
        severity,
        file,
        line,
        column,
        message: caps[5].to_string(),
    })
}

/// Parses build output in emission order; non-matching lines are dropped.
pub fn parse_stream<I, S>(lines: I) -> Vec<Diagnostic>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    lines
        .into_iter()
        .filter_map(|l| parse_line(l.as_ref()))
        .enumerate()
        .map(|(seq, mut d)| {
            d.seq = seq;
            d
        })
        .collect()
}

/// The error with the smallest `seq`.
pub fn first_error(diags: &[Diagnostic]) -> Option<&Diagnostic> {
    diags.iter().filter(|d| d.is_error()).min_by_key(|d| d.seq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Next,
    Previous,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no errors to cycle through")]
pub struct NoErrors;

/// Steps from the error at `current_seq` to its neighbour, wrapping around.
///
/// A `current_seq` that names no error restarts the cycle: `Next` yields the
/// first error and `Previous` the last.
pub fn cycle_errors(diags: &[Diagnostic], current_seq: usize, direction: Direction) -> Result<&Diagnostic, NoErrors> {
    let mut errors: Vec<&Diagnostic> = diags.iter().filter(|d| d.is_error()).collect();
    if errors.is_empty() {
        return Err(NoErrors);
    }
    errors.sort_by_key(|d| d.seq);
    let n = errors.len();
    let pick = match errors.iter().position(|d| d.seq == current_seq) {
        Some(i) => match direction {
            Direction::Next => (i + 1) % n,
            Direction::Previous => (i + n - 1) % n,
        },
        None => match direction {
            Direction::Next => 0,
            Direction::Previous => n - 1,
        },
    };
    Ok(errors[pick])
}

/// Identity of a suppressed warning. The line number is deliberately not
/// part of it, so suppression survives edits above the warning.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarningFingerprint {
    #[serde(rename = "path")]
    pub file: String,
    pub message: String,
}

/// Contents of `.solowin/ignores.json`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IgnoreStore {
    #[serde(default)]
    pub ignores: BTreeSet<WarningFingerprint>,
}

impl Store for IgnoreStore {
    const FILE_NAME: &'static str = "ignores.json";
}

impl IgnoreStore {
    pub fn insert(&mut self, fp: WarningFingerprint) -> bool {
        self.ignores.insert(fp)
    }

    pub fn contains(&self, fp: &WarningFingerprint) -> bool {
        self.ignores.contains(fp)
    }

    pub fn len(&self) -> usize {
        self.ignores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ignores.is_empty()
    }
}

/// Drops ignored warnings. Errors and notes always survive; survivors keep
/// their order and `seq`.
pub fn apply_ignores(diags: &[Diagnostic], store: &IgnoreStore) -> Vec<Diagnostic> {
    diags
        .iter()
        .filter(|d| !(d.is_warning() && store.contains(&d.fingerprint())))
        .cloned()
        .collect()
}

/// (errors, warnings); notes are not counted.
pub fn counts(diags: &[Diagnostic]) -> (usize, usize) {
    diags.iter().fold((0, 0), |(e, w), d| match d.severity {
        Severity::Error => (e + 1, w),
        Severity::Warning => (e, w + 1),
        Severity::Note => (e, w),
    })
}
