//! Plain-text renderings shared by the subcommands.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use solowin_core::buildrun::BuildEvent;
use solowin_core::crumbs::{BreadcrumbTrail, NodeKind};
use solowin_core::diagnostics::Diagnostic;
use solowin_core::inline::{DecorationStyle, WidgetKind};
use solowin_core::statusbar::{FeedEvent, StaticWidget};
use solowin_core::symbols::{Symbol, Task};
use solowin_core::Engine;

pub fn build_event(ev: &BuildEvent) -> Option<String> {
    match ev {
        BuildEvent::Started => Some("[started]".into()),
        BuildEvent::OutputLine(_) => None,
        BuildEvent::Finished {
            exit_code,
            error_count,
            warning_count,
        } => Some(format!(
            "[finished exit={exit_code} errors={error_count} warnings={warning_count}]"
        )),
    }
}

pub fn trail(t: &BreadcrumbTrail) -> String {
    t.blocks
        .iter()
        .map(|b| {
            let mut s = match b.kind {
                NodeKind::Thread => format!("{}(thread)", b.label),
                _ => b.label.clone(),
            };
            if b.kind != NodeKind::Root && !b.marks.is_zero() {
                write!(s, " [{}]", b.marks).unwrap();
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" > ")
}

/// Which annotations a document rendering includes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detail {
    /// Diagnostics only, with one line of context around each.
    Excerpt,
    /// Every line and every widget.
    Full,
}

fn line_mark(styles: &[DecorationStyle], first_error: bool) -> char {
    if first_error {
        '>'
    } else if styles.contains(&DecorationStyle::ErrorHighlight) {
        '!'
    } else if styles.contains(&DecorationStyle::WarningUnderline) {
        '~'
    } else if styles.contains(&DecorationStyle::TaskMarkerInline) {
        '*'
    } else {
        '|'
    }
}

fn push_line(out: &mut String, line: String) {
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Annotated listing of one document under a `--- PATH` header.
pub fn document(engine: &Engine, path: &str, detail: Detail) -> String {
    let mut out = String::new();
    let (doc, widgets, decorations) = match (
        engine.document(path),
        engine.widgets_for(path),
        engine.decorations_for(path),
    ) {
        (Ok(d), Ok(w), Ok(dec)) => (d, w, dec),
        _ => {
            push_line(&mut out, format!("--- {path} (unavailable)"));
            return out;
        }
    };
    push_line(&mut out, format!("--- {path}"));
    let n = doc.line_count();
    let clamp = |l: usize| l.clamp(1, n.max(1));
    let diags: Vec<&Diagnostic> = engine
        .diagnostics()
        .iter()
        .filter(|d| d.file == path && (d.is_error() || d.is_warning()))
        .collect();
    let error_total = engine.diagnostics().iter().filter(|d| d.is_error()).count();

    let shown: BTreeSet<usize> = match detail {
        Detail::Full => (1..=n).collect(),
        Detail::Excerpt => diags
            .iter()
            .flat_map(|d| {
                let l = clamp(d.line);
                l.saturating_sub(1).max(1)..=(l + 1).min(n)
            })
            .collect(),
    };
    let mut prev = 0;
    for &l in &shown {
        if prev != 0 && l != prev + 1 {
            push_line(&mut out, "   ...".into());
        }
        prev = l;
        let styles: Vec<DecorationStyle> = decorations
            .iter()
            .filter(|d| d.line == l && (detail == Detail::Full || d.style != DecorationStyle::TaskMarkerInline))
            .map(|d| d.style)
            .collect();
        let here: Vec<_> = widgets.iter().filter(|w| w.anchor.line == l).collect();
        let first = here.iter().any(|w| w.kind == WidgetKind::FirstError);
        push_line(
            &mut out,
            format!("{l:>4}{} {}", line_mark(&styles, first), doc.line(l).unwrap_or("")),
        );
        for w in &here {
            match w.kind {
                WidgetKind::FirstError => push_line(&mut out, format!("  >> error[1/{error_total}]: {}", w.content)),
                WidgetKind::TaskNav if detail == Detail::Full => {
                    let (i, total) = task_position(engine.tasks(), path, l, &w.content);
                    push_line(&mut out, format!("  ** {} [{i}/{total}]", w.content));
                }
                WidgetKind::BreakpointEditor if detail == Detail::Full => {
                    push_line(&mut out, format!("  @@ {}", w.content))
                }
                _ => {}
            }
        }
        for d in diags.iter().filter(|d| d.is_warning() && clamp(d.line) == l) {
            push_line(&mut out, format!("  ~~ warning: {}", d.message));
        }
    }
    out
}

fn task_position(tasks: &[Task], file: &str, line: usize, keyword: &str) -> (usize, usize) {
    let i = tasks
        .iter()
        .position(|t| t.file == file && t.line == line && t.keyword == keyword)
        .map_or(0, |i| i + 1);
    (i, tasks.len())
}

pub fn task(t: &Task) -> String {
    if t.text.is_empty() {
        format!("{}:{}:{}: {}", t.file, t.line, t.column, t.keyword)
    } else {
        format!("{}:{}:{}: {}: {}", t.file, t.line, t.column, t.keyword, t.text)
    }
}

pub fn symbol(s: &Symbol) -> String {
    match &s.container {
        Some(c) => format!("{}:{}: {} {}::{}", s.file, s.line, s.kind.name(), c, s.name),
        None => format!("{}:{}: {} {}", s.file, s.line, s.kind.name(), s.name),
    }
}

pub fn widget(w: &StaticWidget) -> String {
    format!("{}: {}", w.id, w.text)
}

pub fn feed_event(ev: &FeedEvent) -> String {
    format!("#{} t={} [{}] {}", ev.id, ev.timestamp, ev.category.name(), ev.text)
}
