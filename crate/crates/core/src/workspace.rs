//! Documents, project configuration, and the versioned JSON stores under
//! `.solowin/`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

/// Directory (relative to the project root) holding config and stores.
pub const CONFIG_DIR: &str = ".solowin";
/// Schema version written into and required from every JSON file.
pub const SCHEMA_VERSION: u64 = 1;

pub const DEFAULT_TASK_KEYWORDS: [&str; 3] = ["TODO", "FIXME", "HACK"];
pub const DEFAULT_STATUS_WIDGETS: [&str; 3] = ["errors", "tasks", "vcs"];
pub const DEFAULT_SOURCE_EXTENSIONS: [&str; 8] = ["c", "h", "cc", "cpp", "cxx", "hpp", "hh", "hxx"];
/// Suggested `vcs_status_command` for git working copies.
pub const SUGGESTED_VCS_COMMAND: [&str; 3] = ["git", "status", "--porcelain"];

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("path escapes project root: {0}")]
    OutsideRoot(String),
    #[error("malformed {file}: {message}")]
    MalformedConfig { file: String, message: String },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl WorkspaceError {
    fn io(path: &Path, source: io::Error) -> Self {
        WorkspaceError::IoFailure {
            path: path.display().to_string(),
            source,
        }
    }

    fn malformed(file: &str, message: impl Into<String>) -> Self {
        WorkspaceError::MalformedConfig {
            file: file.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = WorkspaceError> = std::result::Result<T, E>;

/// Normalizes a `/`-separated relative path: drops empty and `.` segments and
/// resolves `..` against preceding segments.
///
/// Returns `None` when `..` would climb above the starting directory.
pub fn normalize_path(path: &str) -> Option<String> {
    let mut parts: Vec<&str> = Vec::new();
    for seg in path.split(['/', '\\']) {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            s => parts.push(s),
        }
    }
    Some(parts.join("/"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LanguageHint {
    CLike,
    Unknown,
}

impl LanguageHint {
    pub fn for_path(path: &str) -> Self {
        let ext = path.rsplit_once('.').map(|(_, e)| e).unwrap_or("");
        if DEFAULT_SOURCE_EXTENSIONS.contains(&ext) {
            LanguageHint::CLike
        } else {
            LanguageHint::Unknown
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub path: String,
    pub lines: Vec<String>,
    pub language_hint: LanguageHint,
    /// 0 = most recently opened or focused; `None` when closed.
    pub open_rank: Option<usize>,
}

impl Document {
    /// Builds a detached document from raw text.
    pub fn from_text(path: impl Into<String>, text: &str) -> Self {
        let path = path.into();
        Document {
            language_hint: LanguageHint::for_path(&path),
            path,
            lines: split_lines(text),
            open_rank: None,
        }
    }

    pub fn line(&self, line: usize) -> Option<&str> {
        line.checked_sub(1).and_then(|i| self.lines.get(i)).map(String::as_str)
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }
}

/// Splits text on LF, stripping a CR before each LF. A trailing newline does
/// not produce an extra empty line, and empty text has zero lines.
pub fn split_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

/// Open documents plus most-recently-used ordering.
#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    docs: BTreeMap<String, Document>,
    mru: Vec<String>,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace {
            root: root.into(),
            docs: BTreeMap::new(),
            mru: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Resolves a user-supplied path (relative to the root, or absolute
    /// inside it) to a normalized workspace-relative path.
    pub fn resolve(&self, path: &str) -> Result<String> {
        let p = Path::new(path);
        let rel = if p.is_absolute() {
            let stripped = p
                .strip_prefix(&self.root)
                .map_err(|_| WorkspaceError::OutsideRoot(path.to_string()))?;
            stripped
                .components()
                .filter_map(|c| match c {
                    Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
                    Component::ParentDir => Some("..".to_string()),
                    _ => None,
                })
                .collect::<Vec<_>>()
                .join("/")
        } else {
            path.to_string()
        };
        match normalize_path(&rel) {
            Some(n) if !n.is_empty() => Ok(n),
            Some(_) => Err(WorkspaceError::NotFound(path.to_string())),
            None => Err(WorkspaceError::OutsideRoot(path.to_string())),
        }
    }

    /// Loads (or reloads) a document and makes it the most recent one.
    pub fn open_document(&mut self, path: &str) -> Result<&Document> {
        let rel = self.resolve(path)?;
        let abs = self.root.join(&rel);
        let bytes = match fs::read(&abs) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(WorkspaceError::NotFound(rel)),
            Err(e) => return Err(WorkspaceError::io(&abs, e)),
        };
        if abs.is_dir() {
            return Err(WorkspaceError::NotFound(rel));
        }
        let text = String::from_utf8_lossy(&bytes);
        let doc = Document::from_text(rel.clone(), &text);
        self.docs.insert(rel.clone(), doc);
        self.touch(&rel);
        Ok(&self.docs[&rel])
    }

    /// Focusing counts as opening for MRU purposes.
    pub fn focus(&mut self, path: &str) -> Result<()> {
        let rel = self.resolve(path)?;
        if !self.docs.contains_key(&rel) {
            return Err(WorkspaceError::NotFound(rel));
        }
        self.touch(&rel);
        Ok(())
    }

    pub fn close(&mut self, path: &str) -> bool {
        let Ok(rel) = self.resolve(path) else {
            return false;
        };
        let removed = self.docs.remove(&rel).is_some();
        self.mru.retain(|p| p != &rel);
        self.renumber();
        removed
    }

    fn touch(&mut self, rel: &str) {
        self.mru.retain(|p| p != rel);
        self.mru.insert(0, rel.to_string());
        self.renumber();
    }

    fn renumber(&mut self) {
        for (rank, path) in self.mru.iter().enumerate() {
            if let Some(doc) = self.docs.get_mut(path) {
                doc.open_rank = Some(rank);
            }
        }
    }

    /// Open documents, most recently opened or focused first.
    pub fn recent_open_order(&self) -> Vec<String> {
        self.mru.clone()
    }

    pub fn document(&self, path: &str) -> Option<&Document> {
        self.docs.get(path)
    }

    pub fn is_open(&self, path: &str) -> bool {
        self.docs.contains_key(path)
    }

    /// Reads a document without touching MRU state; open documents are
    /// served from memory.
    pub fn peek_document(&self, rel: &str) -> Result<Document> {
        if let Some(doc) = self.docs.get(rel) {
            return Ok(doc.clone());
        }
        let abs = self.root.join(rel);
        match fs::read(&abs) {
            Ok(b) => Ok(Document::from_text(rel, &String::from_utf8_lossy(&b))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(WorkspaceError::NotFound(rel.into())),
            Err(e) => Err(WorkspaceError::io(&abs, e)),
        }
    }
}

/// Lists project files as sorted workspace-relative paths. The config
/// directory is always skipped; other dot-prefixed entries only when
/// `show_hidden` is false.
pub fn list_files(root: &Path, show_hidden: bool) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            if e.depth() == 0 {
                return true;
            }
            let name = e.file_name().to_string_lossy();
            name != CONFIG_DIR && (show_hidden || !name.starts_with('.'))
        });
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
            WorkspaceError::io(&path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        if let Ok(rel) = entry.path().strip_prefix(root) {
            let rel = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            out.push(rel);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectConfig {
    pub root: PathBuf,
    pub build_command: Vec<String>,
    pub task_keywords: BTreeSet<String>,
    pub status_widgets: Vec<String>,
    pub vcs_status_command: Option<Vec<String>>,
    /// Extensions shown in Project mode.
    pub source_extensions: Vec<String>,
    /// Show dot-prefixed files in FileSystem mode.
    pub show_hidden: bool,
}

impl ProjectConfig {
    pub fn defaults(root: impl Into<PathBuf>) -> Self {
        ProjectConfig {
            root: root.into(),
            build_command: vec!["make".to_string()],
            task_keywords: DEFAULT_TASK_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            status_widgets: DEFAULT_STATUS_WIDGETS.iter().map(|s| s.to_string()).collect(),
            vcs_status_command: None,
            source_extensions: DEFAULT_SOURCE_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
            show_hidden: false,
        }
    }

    pub fn config_path(root: &Path) -> PathBuf {
        root.join(CONFIG_DIR).join("project.json")
    }

    pub fn is_source_file(&self, path: &str) -> bool {
        let ext = path.rsplit_once('.').map(|(_, e)| e).unwrap_or("");
        self.source_extensions.iter().any(|e| e == ext)
    }
}

/// Reads `.solowin/project.json`, falling back to defaults when absent.
pub fn load_project(root: &Path) -> Result<ProjectConfig> {
    if !root.is_dir() {
        return Err(WorkspaceError::NotFound(root.display().to_string()));
    }
    let root = root.canonicalize().map_err(|e| WorkspaceError::io(root, e))?;
    let path = ProjectConfig::config_path(&root);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(ProjectConfig::defaults(root)),
        Err(e) => return Err(WorkspaceError::io(&path, e)),
    };
    parse_project(&root, &text)
}

const PROJECT_FILE: &str = "project.json";

fn string_list(key: &str, value: &Value) -> Result<Vec<String>> {
    let arr = value
        .as_array()
        .ok_or_else(|| WorkspaceError::malformed(PROJECT_FILE, format!("\"{key}\" must be an array of strings")))?;
    arr.iter()
        .map(|v| {
            v.as_str().map(str::to_string).ok_or_else(|| {
                WorkspaceError::malformed(PROJECT_FILE, format!("\"{key}\" must be an array of strings"))
            })
        })
        .collect()
}

/// Validates and parses the text of `project.json`.
pub fn parse_project(root: &Path, text: &str) -> Result<ProjectConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| WorkspaceError::malformed(PROJECT_FILE, format!("invalid JSON: {e}")))?;
    let obj = expect_versioned_object(PROJECT_FILE, value)?;
    let mut cfg = ProjectConfig::defaults(root);
    for (key, v) in &obj {
        match key.as_str() {
            "build_command" => {
                let cmd = string_list(key, v)?;
                if cmd.is_empty() || cmd[0].is_empty() {
                    return Err(WorkspaceError::malformed(
                        PROJECT_FILE,
                        "\"build_command\" must be non-empty",
                    ));
                }
                cfg.build_command = cmd;
            }
            "task_keywords" => {
                let kws = string_list(key, v)?;
                if kws.is_empty() {
                    return Err(WorkspaceError::malformed(
                        PROJECT_FILE,
                        "\"task_keywords\" must be non-empty",
                    ));
                }
                if let Some(bad) = kws.iter().find(|k| k.is_empty() || k.chars().any(char::is_whitespace)) {
                    return Err(WorkspaceError::malformed(
                        PROJECT_FILE,
                        format!("\"task_keywords\" entry {bad:?} is empty or contains whitespace"),
                    ));
                }
                cfg.task_keywords = kws.into_iter().collect();
            }
            "status_widgets" => {
                let ids = string_list(key, v)?;
                let mut seen = BTreeSet::new();
                if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
                    return Err(WorkspaceError::malformed(
                        PROJECT_FILE,
                        format!("\"status_widgets\" contains duplicate id {dup:?}"),
                    ));
                }
                cfg.status_widgets = ids;
            }
            "vcs_status_command" => {
                cfg.vcs_status_command = if v.is_null() {
                    None
                } else {
                    let cmd = string_list(key, v)?;
                    if cmd.is_empty() {
                        return Err(WorkspaceError::malformed(
                            PROJECT_FILE,
                            "\"vcs_status_command\" must be non-empty or null",
                        ));
                    }
                    Some(cmd)
                };
            }
            "source_extensions" => {
                cfg.source_extensions = string_list(key, v)?
                    .into_iter()
                    .map(|e| e.trim_start_matches('.').to_string())
                    .collect();
            }
            "show_hidden" => {
                cfg.show_hidden = v
                    .as_bool()
                    .ok_or_else(|| WorkspaceError::malformed(PROJECT_FILE, "\"show_hidden\" must be a boolean"))?;
            }
            other => {
                return Err(WorkspaceError::malformed(
                    PROJECT_FILE,
                    format!("unknown key \"{other}\""),
                ));
            }
        }
    }
    Ok(cfg)
}

fn expect_versioned_object(file: &str, value: Value) -> Result<Map<String, Value>> {
    let Value::Object(mut obj) = value else {
        return Err(WorkspaceError::malformed(file, "top level must be an object"));
    };
    match obj.remove("version") {
        None => Err(WorkspaceError::malformed(file, "missing \"version\"")),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => Ok(obj),
        Some(v) => Err(WorkspaceError::malformed(
            file,
            format!("unsupported \"version\" {v} (expected {SCHEMA_VERSION})"),
        )),
    }
}

/// A value persisted as `.solowin/<FILE_NAME>`.
///
/// Implementors serialize to a JSON object; the `"version"` field is added on
/// save and checked on load.
pub trait Store: Serialize + DeserializeOwned + Default {
    const FILE_NAME: &'static str;
}

pub fn store_path<S: Store>(root: &Path) -> PathBuf {
    root.join(CONFIG_DIR).join(S::FILE_NAME)
}

pub fn save_store<S: Store>(root: &Path, value: &S) -> Result<()> {
    let mut obj = match serde_json::to_value(value) {
        Ok(Value::Object(obj)) => obj,
        Ok(_) => {
            return Err(WorkspaceError::malformed(
                S::FILE_NAME,
                "store must serialize to an object",
            ))
        }
        Err(e) => return Err(WorkspaceError::malformed(S::FILE_NAME, e.to_string())),
    };
    obj.insert("version".to_string(), Value::from(SCHEMA_VERSION));
    let dir = root.join(CONFIG_DIR);
    fs::create_dir_all(&dir).map_err(|e| WorkspaceError::io(&dir, e))?;
    let path = dir.join(S::FILE_NAME);
    let mut text = serde_json::to_string_pretty(&Value::Object(obj))
        .map_err(|e| WorkspaceError::malformed(S::FILE_NAME, e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| WorkspaceError::io(&path, e))
}

/// Loads a store; a missing file yields the default value.
pub fn load_store<S: Store>(root: &Path) -> Result<S> {
    let path = store_path::<S>(root);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(S::default()),
        Err(e) => return Err(WorkspaceError::io(&path, e)),
    };
    parse_store(&text)
}

pub fn parse_store<S: Store>(text: &str) -> Result<S> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| WorkspaceError::malformed(S::FILE_NAME, format!("invalid JSON: {e}")))?;
    let obj = expect_versioned_object(S::FILE_NAME, value)?;
    serde_json::from_value(Value::Object(obj)).map_err(|e| WorkspaceError::malformed(S::FILE_NAME, e.to_string()))
}

/// Saves then reloads a store value.
pub fn store_roundtrip<S: Store>(root: &Path, value: &S) -> Result<S> {
    save_store(root, value)?;
    load_store(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn project() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("src")).unwrap();
        fs::write(dir.path().join("src/a.c"), "x\r\ny\n").unwrap();
        fs::write(dir.path().join("src/b.c"), "b\n").unwrap();
        fs::write(dir.path().join("src/c.c"), "c").unwrap();
        fs::write(dir.path().join("empty.c"), "").unwrap();
        dir
    }

    #[test]
    fn open_normalizes_line_endings() {
        let dir = project();
        let mut ws = Workspace::new(dir.path());
        let doc = ws.open_document("src/a.c").unwrap();
        assert_eq!(doc.lines, vec!["x", "y"]);
        assert_eq!(doc.open_rank, Some(0));
        assert_eq!(doc.language_hint, LanguageHint::CLike);
    }

    #[test]
    fn empty_file_has_no_lines() {
        let dir = project();
        let mut ws = Workspace::new(dir.path());
        assert!(ws.open_document("empty.c").unwrap().lines.is_empty());
    }

    #[test]
    fn open_rejects_escape_and_missing() {
        let dir = project();
        let mut ws = Workspace::new(dir.path());
        assert!(matches!(
            ws.open_document("../etc/passwd"),
            Err(WorkspaceError::OutsideRoot(_))
        ));
        assert!(matches!(
            ws.open_document("src/../../x"),
            Err(WorkspaceError::OutsideRoot(_))
        ));
        assert!(matches!(
            ws.open_document("src/nope.c"),
            Err(WorkspaceError::NotFound(_))
        ));
        assert!(matches!(
            ws.open_document("/etc/passwd"),
            Err(WorkspaceError::OutsideRoot(_))
        ));
    }

    #[test]
    fn mru_order() {
        let dir = project();
        let mut ws = Workspace::new(dir.path());
        assert!(ws.recent_open_order().is_empty());
        ws.open_document("src/a.c").unwrap();
        assert_eq!(ws.recent_open_order(), vec!["src/a.c"]);
        ws.open_document("src/b.c").unwrap();
        ws.open_document("./src/c.c").unwrap();
        ws.focus("src/a.c").unwrap();
        assert_eq!(ws.recent_open_order(), vec!["src/a.c", "src/c.c", "src/b.c"]);
        assert_eq!(ws.document("src/b.c").unwrap().open_rank, Some(2));
        ws.close("src/c.c");
        assert_eq!(ws.recent_open_order(), vec!["src/a.c", "src/b.c"]);
        assert_eq!(ws.document("src/b.c").unwrap().open_rank, Some(1));
    }

    #[test]
    fn project_defaults_and_overrides() {
        let dir = project();
        let cfg = load_project(dir.path()).unwrap();
        assert_eq!(cfg.build_command, vec!["make"]);
        assert_eq!(
            cfg.task_keywords.iter().collect::<Vec<_>>(),
            vec!["FIXME", "HACK", "TODO"]
        );
        assert_eq!(cfg.status_widgets, vec!["errors", "tasks", "vcs"]);
        assert_eq!(cfg.vcs_status_command, None);

        fs::create_dir_all(dir.path().join(CONFIG_DIR)).unwrap();
        let path = ProjectConfig::config_path(dir.path());
        fs::write(&path, r#"{"version":1,"build_command":["cc","main.c"]}"#).unwrap();
        assert_eq!(load_project(dir.path()).unwrap().build_command, vec!["cc", "main.c"]);

        fs::write(&path, r#"{"version":1,"build_command":[]}"#).unwrap();
        let err = load_project(dir.path()).unwrap_err().to_string();
        assert!(err.contains("build_command"), "{err}");
    }

    #[test]
    fn project_validation_names_key() {
        let root = Path::new("/tmp");
        let cases = [
            (r#"{"version":1,"bogus":1}"#, "bogus"),
            (r#"{"version":1,"task_keywords":["TO DO"]}"#, "task_keywords"),
            (r#"{"version":1,"task_keywords":[]}"#, "task_keywords"),
            (
                r#"{"version":1,"status_widgets":["errors","errors"]}"#,
                "status_widgets",
            ),
            (r#"{"version":1,"show_hidden":"yes"}"#, "show_hidden"),
            (r#"{"version":2}"#, "version"),
            (r#"{"build_command":["make"]}"#, "version"),
            (r#"[1]"#, "object"),
        ];
        for (text, key) in cases {
            match parse_project(root, text) {
                Err(WorkspaceError::MalformedConfig { message, .. }) => {
                    assert!(message.contains(key), "{text}: {message}")
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[derive(Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Dummy {
        #[serde(default)]
        items: Vec<String>,
    }

    impl Store for Dummy {
        const FILE_NAME: &'static str = "dummy.json";
    }

    #[test]
    fn store_version_gate() {
        let dir = tempfile::tempdir().unwrap();
        let value = Dummy {
            items: vec!["a".into()],
        };
        assert_eq!(store_roundtrip(dir.path(), &value).unwrap(), value);
        let text = fs::read_to_string(store_path::<Dummy>(dir.path())).unwrap();
        assert!(text.contains("\"version\": 1"));
        assert!(matches!(
            parse_store::<Dummy>(r#"{"version":99,"items":[]}"#),
            Err(WorkspaceError::MalformedConfig { .. })
        ));
        assert!(load_store::<Dummy>(tempfile::tempdir().unwrap().path())
            .unwrap()
            .items
            .is_empty());
    }

    #[test]
    fn list_files_skips_hidden_and_config() {
        let dir = project();
        fs::create_dir_all(dir.path().join(".git")).unwrap();
        fs::write(dir.path().join(".git/HEAD"), "x").unwrap();
        fs::write(dir.path().join(".hidden.c"), "x").unwrap();
        save_store(dir.path(), &Dummy::default()).unwrap();
        assert_eq!(
            list_files(dir.path(), false).unwrap(),
            vec!["empty.c", "src/a.c", "src/b.c", "src/c.c"]
        );
        let all = list_files(dir.path(), true).unwrap();
        assert!(all.contains(&".hidden.c".to_string()));
        assert!(!all.iter().any(|p| p.starts_with(CONFIG_DIR)));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(segs in proptest::collection::vec(prop_oneof![
            Just(".".to_string()), Just("..".to_string()), Just(String::new()), "[a-z]{1,3}"
        ], 0..8)) {
            let p = segs.join("/");
            if let Some(n) = normalize_path(&p) {
                prop_assert_eq!(normalize_path(&n), Some(n.clone()));
                prop_assert!(!n.split('/').any(|s| s == "." || s == ".."));
            }
        }

        #[test]
        fn lines_round_trip(lines in proptest::collection::vec("[a-z \\t\\r]{0,6}", 1..6)) {
            // a CR directly before the LF is a line ending, not content
            prop_assume!(lines.iter().all(|l| !l.ends_with('\r')));
            let joined = lines.join("\n");
            prop_assert_eq!(joined.split('\n').map(str::to_string).collect::<Vec<_>>(), lines.clone());
            let mut text = joined.clone();
            text.push('\n');
            prop_assert_eq!(split_lines(&text), lines);
        }

        #[test]
        fn mru_has_no_duplicates(ops in proptest::collection::vec((0usize..4, any::<bool>()), 0..30)) {
            let dir = tempfile::tempdir().unwrap();
            let names = ["a.c", "b.c", "c.c", "d.c"];
            for n in names {
                fs::write(dir.path().join(n), "x").unwrap();
            }
            let mut ws = Workspace::new(dir.path());
            for (i, close) in ops {
                if close {
                    ws.close(names[i]);
                } else {
                    ws.open_document(names[i]).unwrap();
                }
                let order = ws.recent_open_order();
                let uniq: BTreeSet<_> = order.iter().collect();
                prop_assert_eq!(uniq.len(), order.len());
                prop_assert_eq!(order.len(), names.iter().filter(|n| ws.is_open(n)).count());
            }
        }
    }
}
