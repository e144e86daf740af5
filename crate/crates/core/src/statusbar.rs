//! Enhanced status bar: a static widget row fed by providers, and a dynamic
//! message feed with bounded history.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crumbs::MarkToggles;
use crate::workspace::Store;
use crate::Location;

pub const FEED_CAPACITY: usize = 100;
/// Rendered widget text is at most this many characters.
pub const WIDGET_TEXT_MAX: usize = 8;

pub const WIDGET_ERRORS: &str = "errors";
pub const WIDGET_TASKS: &str = "tasks";
pub const WIDGET_VCS: &str = "vcs";

pub const TOGGLE_INLINE_WIDGETS: &str = "inline_widgets";
pub const TOGGLE_TASK_NAV: &str = "task_nav";
pub const TOGGLE_MARKS_ERRORS: &str = "marks.errors";
pub const TOGGLE_MARKS_WARNINGS: &str = "marks.warnings";
pub const TOGGLE_MARKS_TASKS: &str = "marks.tasks";
pub const TOGGLE_MARKS_BREAKPOINTS: &str = "marks.breakpoints";

/// What a left click on a widget or feed message does.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionRef {
    JumpToFirstError,
    JumpToLocation(Location),
    ToggleInlineWidgets,
    ToggleCrumbMarks(String),
    OpenVariablesSplit,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticWidget {
    pub id: String,
    pub icon: &'static str,
    pub text: String,
    pub action: ActionRef,
    pub context_toggles: Vec<&'static str>,
}

/// Provider outputs the static widgets are computed from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WidgetState {
    /// Errors in the last completed build (after ignores).
    pub errors: usize,
    pub tasks: usize,
    pub first_task: Option<Location>,
    /// Changed files in the working copy; `None` when no provider is
    /// configured or the provider failed.
    pub vcs_changed: Option<usize>,
}

fn count_text(n: usize) -> String {
    let s = n.to_string();
    if s.len() <= WIDGET_TEXT_MAX {
        s
    } else {
        format!("{}+", "9".repeat(WIDGET_TEXT_MAX - 1))
    }
}

/// Builds the widget row in configured order. Unknown ids are skipped with a
/// warning; the vcs widget is omitted while its count is unavailable.
pub fn refresh_widgets<S: AsRef<str>>(order: &[S], state: &WidgetState) -> Vec<StaticWidget> {
    let mut out = Vec::new();
    for id in order {
        let id = id.as_ref();
        let widget = match id {
            WIDGET_ERRORS => StaticWidget {
                id: id.to_string(),
                icon: "error",
                text: count_text(state.errors),
                action: ActionRef::JumpToFirstError,
                context_toggles: vec![
                    TOGGLE_INLINE_WIDGETS,
                    TOGGLE_MARKS_ERRORS,
                    TOGGLE_MARKS_WARNINGS,
                    TOGGLE_MARKS_BREAKPOINTS,
                ],
            },
            WIDGET_TASKS => StaticWidget {
                id: id.to_string(),
                icon: "task",
                text: count_text(state.tasks),
                action: state
                    .first_task
                    .clone()
                    .map(ActionRef::JumpToLocation)
                    .unwrap_or(ActionRef::None),
                context_toggles: vec![TOGGLE_TASK_NAV, TOGGLE_MARKS_TASKS],
            },
            WIDGET_VCS => match state.vcs_changed {
                Some(n) => StaticWidget {
                    id: id.to_string(),
                    icon: "vcs",
                    text: count_text(n),
                    action: ActionRef::None,
                    context_toggles: Vec::new(),
                },
                None => continue,
            },
            other => {
                log::warn!("unknown status widget id {other:?} skipped");
                continue;
            }
        };
        out.push(widget);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    Build,
    Debug,
    Tasks,
    Vcs,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Build => "build",
            Category::Debug => "debug",
            Category::Tasks => "tasks",
            Category::Vcs => "vcs",
        }
    }
}

/// A message before the feed stamps it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub category: Category,
    pub text: String,
    pub action: Option<ActionRef>,
}

impl Message {
    pub fn new(category: Category, text: impl Into<String>) -> Self {
        Message {
            category,
            text: text.into(),
            action: None,
        }
    }

    pub fn with_action(mut self, action: ActionRef) -> Self {
        self.action = Some(action);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedEvent {
    pub id: u64,
    /// Monotonic microseconds since the feed was created (a plain counter
    /// in deterministic mode); strictly increasing.
    pub timestamp: u64,
    pub category: Category,
    pub text: String,
    pub action: Option<ActionRef>,
}

/// Bounded newest-first message history.
#[derive(Debug)]
pub struct Feed {
    events: VecDeque<FeedEvent>,
    capacity: usize,
    started: Option<Instant>,
    last_timestamp: u64,
    next_id: u64,
}

impl Feed {
    pub fn new() -> Self {
        Feed::with_capacity(FEED_CAPACITY, false)
    }

    /// A feed whose timestamps are a plain counter.
    pub fn deterministic() -> Self {
        Feed::with_capacity(FEED_CAPACITY, true)
    }

    pub fn with_capacity(capacity: usize, deterministic: bool) -> Self {
        assert!(capacity > 0);
        Feed {
            events: VecDeque::with_capacity(capacity),
            capacity,
            started: (!deterministic).then(Instant::now),
            last_timestamp: 0,
            next_id: 0,
        }
    }

    pub fn push(&mut self, msg: Message) -> &FeedEvent {
        let now = self.started.map(|s| s.elapsed().as_micros() as u64).unwrap_or(0);
        let timestamp = now.max(self.last_timestamp + 1);
        self.last_timestamp = timestamp;
        let id = self.next_id;
        self.next_id += 1;
        if self.events.len() == self.capacity {
            self.events.pop_front();
        }
        self.events.push_back(FeedEvent {
            id,
            timestamp,
            category: msg.category,
            text: msg.text,
            action: msg.action,
        });
        self.events.back().expect("just pushed")
    }

    /// The message currently shown in the bar.
    pub fn current(&self) -> Option<&FeedEvent> {
        self.events.back()
    }

    /// Newest first, at most `limit` entries.
    pub fn history(&self, limit: usize) -> Vec<&FeedEvent> {
        self.events.iter().rev().take(limit).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The action to dispatch when the user picks event `id` from history.
    pub fn choose(&self, id: u64) -> Option<ActionRef> {
        self.events
            .iter()
            .find(|e| e.id == id)
            .map(|e| e.action.clone().unwrap_or(ActionRef::None))
    }
}

impl Default for Feed {
    fn default() -> Self {
        Feed::new()
    }
}

/// Contents of `.solowin/statusbar.json`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatusbarLayout {
    /// Widget order; empty means "use the project config order".
    #[serde(default)]
    pub widgets: Vec<String>,
    #[serde(default)]
    pub toggles: BTreeMap<String, bool>,
}

impl Store for StatusbarLayout {
    const FILE_NAME: &'static str = "statusbar.json";
}

/// Display switches reachable from widget context menus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Toggles {
    pub inline_widgets: bool,
    pub task_nav: bool,
    pub marks: MarkToggles,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            inline_widgets: true,
            task_nav: true,
            marks: MarkToggles::default(),
        }
    }
}

impl Toggles {
    fn slot(&mut self, id: &str) -> Option<&mut bool> {
        Some(match id {
            TOGGLE_INLINE_WIDGETS => &mut self.inline_widgets,
            TOGGLE_TASK_NAV => &mut self.task_nav,
            TOGGLE_MARKS_ERRORS => &mut self.marks.errors,
            TOGGLE_MARKS_WARNINGS => &mut self.marks.warnings,
            TOGGLE_MARKS_TASKS => &mut self.marks.tasks,
            TOGGLE_MARKS_BREAKPOINTS => &mut self.marks.breakpoints,
            _ => return None,
        })
    }

    pub fn get(&self, id: &str) -> Option<bool> {
        self.clone().slot(id).map(|b| *b)
    }

    /// Flips a toggle; returns the new value, or `None` for unknown ids.
    pub fn flip(&mut self, id: &str) -> Option<bool> {
        let slot = self.slot(id)?;
        *slot = !*slot;
        Some(*slot)
    }

    pub fn from_map(map: &BTreeMap<String, bool>) -> Self {
        let mut t = Toggles::default();
        for (k, v) in map {
            match t.slot(k) {
                Some(slot) => *slot = *v,
                None => log::warn!("unknown toggle {k:?} in statusbar store ignored"),
            }
        }
        t
    }

    pub fn to_map(&self) -> BTreeMap<String, bool> {
        [
            TOGGLE_INLINE_WIDGETS,
            TOGGLE_TASK_NAV,
            TOGGLE_MARKS_ERRORS,
            TOGGLE_MARKS_WARNINGS,
            TOGGLE_MARKS_TASKS,
            TOGGLE_MARKS_BREAKPOINTS,
        ]
        .iter()
        .map(|id| (id.to_string(), self.get(id).unwrap_or(true)))
        .collect()
    }
}

#[derive(Debug, Error)]
#[error("vcs provider failed: {0}")]
pub struct ProviderFailure(pub String);

/// Counts non-empty output lines of the configured status command (one line
/// per changed file, as porcelain-style status output prints).
///
/// Returns `Ok(None)` when no command is configured.
pub fn vcs_changed_count(command: Option<&[String]>, root: &Path) -> Result<Option<usize>, ProviderFailure> {
    let Some((program, args)) = command.and_then(|c| c.split_first()) else {
        return Ok(None);
    };
    let output = Command::new(program)
        .args(args)
        .current_dir(root)
        .stdin(Stdio::null())
        .stderr(Stdio::null())
        .output()
        .map_err(|e| ProviderFailure(format!("{program}: {e}")))?;
    if !output.status.success() {
        return Err(ProviderFailure(format!("{program} exited with {}", output.status)));
    }
    let text = String::from_utf8_lossy(&output.stdout);
    Ok(Some(text.lines().filter(|l| !l.trim().is_empty()).count()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(i: usize) -> Message {
        Message::new(Category::Build, format!("event {i}"))
    }

    #[test]
    fn widgets_follow_config_order() {
        let state = WidgetState {
            errors: 2,
            tasks: 3,
            first_task: Some(Location::new("a.c", 4)),
            vcs_changed: None,
        };
        let ws = refresh_widgets(&["tasks", "bogus", "errors", "vcs"], &state);
        assert_eq!(
            ws.iter().map(|w| w.id.as_str()).collect::<Vec<_>>(),
            ["tasks", "errors"]
        );
        assert_eq!(ws[1].text, "2");
        assert_eq!(ws[0].text, "3");
        assert_eq!(ws[0].action, ActionRef::JumpToLocation(Location::new("a.c", 4)));
        let with_vcs = refresh_widgets(
            &["vcs"],
            &WidgetState {
                vcs_changed: Some(4),
                ..state.clone()
            },
        );
        assert_eq!(with_vcs[0].text, "4");
        assert_eq!(
            refresh_widgets(&["errors", "tasks"], &state),
            refresh_widgets(&["errors", "tasks"], &state)
        );
    }

    #[test]
    fn widget_text_is_short() {
        assert_eq!(count_text(12_345_678), "12345678");
        assert_eq!(count_text(123_456_789), "9999999+");
    }

    #[test]
    fn feed_newest_wins_and_evicts() {
        let mut feed = Feed::deterministic();
        assert!(feed.current().is_none());
        for i in 1..=3 {
            feed.push(msg(i));
        }
        assert_eq!(feed.current().unwrap().text, "event 3");
        for i in 4..=101 {
            feed.push(msg(i));
        }
        assert_eq!(feed.len(), 100);
        assert_eq!(feed.history(100).last().unwrap().text, "event 2");
    }

    #[test]
    fn history_is_newest_first() {
        let mut feed = Feed::new();
        for i in 1..=5 {
            feed.push(msg(i));
        }
        let h: Vec<_> = feed.history(3).iter().map(|e| e.text.clone()).collect();
        assert_eq!(h, ["event 5", "event 4", "event 3"]);
        assert!(feed.history(5).windows(2).all(|w| w[0].timestamp > w[1].timestamp));
        let mut small = Feed::new();
        small.push(msg(1));
        small.push(msg(2));
        assert_eq!(small.history(100).len(), 2);
    }

    #[test]
    fn choosing_history_returns_action() {
        let mut feed = Feed::deterministic();
        let loc = Location::new("a.c", 12);
        let id = feed
            .push(Message::new(Category::Debug, "paused").with_action(ActionRef::JumpToLocation(loc.clone())))
            .id;
        feed.push(msg(2));
        assert_eq!(feed.choose(id), Some(ActionRef::JumpToLocation(loc)));
        assert_eq!(feed.choose(1), Some(ActionRef::None));
        assert_eq!(feed.choose(42), None);
    }

    #[test]
    fn toggles_round_trip_through_map() {
        let mut t = Toggles::default();
        assert_eq!(t.flip(TOGGLE_MARKS_TASKS), Some(false));
        assert_eq!(t.flip("nope"), None);
        assert_eq!(Toggles::from_map(&t.to_map()), t);
    }

    #[test]
    fn vcs_provider() {
        let root = Path::new(".");
        let cmd = |s: &str| vec!["sh".to_string(), "-c".to_string(), s.to_string()];
        assert_eq!(
            vcs_changed_count(Some(&cmd("printf ' M a\\n?? b\\n\\nA c\\nD d\\n'")), root).unwrap(),
            Some(4)
        );
        assert_eq!(vcs_changed_count(Some(&cmd("true")), root).unwrap(), Some(0));
        assert!(vcs_changed_count(Some(&cmd("exit 3")), root).is_err());
        assert!(vcs_changed_count(Some(&["no-such-vcs-tool".to_string()]), root).is_err());
        assert_eq!(vcs_changed_count(None, root).unwrap(), None);
    }
}
