//! `solowin`: headless front end to the solowin engine.
//!
//! Exit codes: 0 success, 1 the build reported errors, 2 usage error,
//! 3 engine error.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use solowin_core::crumbs::Mode;
use solowin_core::debugmodel::{DebugError, DebugEvent};
use solowin_core::engine::EngineError;
use solowin_core::Engine;

use render::Detail;

const EXIT_BUILD_ERRORS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ENGINE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "solowin",
    version,
    about = "Headless IDE engine: builds, diagnostics, breadcrumbs, tasks, debugging"
)]
struct Cli {
    /// Project root (the directory holding `.solowin/`).
    #[arg(long, global = true, default_value = ".")]
    root: PathBuf,
    /// Use counters instead of clock timestamps in the message feed.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured build and print an annotated report.
    Build,
    /// Print a document with its inline annotations.
    Annotate {
        file: String,
        /// Run the build first.
        #[arg(long)]
        build: bool,
    },
    /// Print the breadcrumb trail for a target.
    ///
    /// Targets: a path in fs/project mode; FILE, FILE#NAME or FILE:LINE in
    /// code mode.
    Crumbs {
        mode: Mode,
        #[arg(default_value = "")]
        target: String,
        #[arg(long)]
        build: bool,
    },
    /// List task comments across the project.
    Tasks,
    /// List the symbols of one source file.
    Symbols { file: String },
    /// Print the status bar widgets and the message feed.
    Status {
        #[arg(long)]
        build: bool,
    },
    /// Replay a debugger trace and print a transcript.
    Debug {
        trace: PathBuf,
        /// File of `step [N]` and `frame THREAD FRAME` commands.
        #[arg(long, conflicts_with = "steps")]
        script: Option<PathBuf>,
        /// Step this many times (default: until the trace ends).
        #[arg(long)]
        steps: Option<usize>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Engine(EngineError),
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Engine(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ScriptCommand {
    Step(usize),
    Frame(usize, usize),
}

fn parse_script(text: &str) -> Result<Vec<ScriptCommand>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| format!("script line {}: bad number {s:?}", i + 1))
        };
        out.push(match words.as_slice() {
            ["step"] => ScriptCommand::Step(1),
            ["step", n] => ScriptCommand::Step(num(n)?),
            ["frame", t, f] => ScriptCommand::Frame(num(t)?, num(f)?),
            _ => return Err(format!("script line {}: unknown command {line:?}", i + 1)),
        });
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let mut out = String::new();
    let result = run(&cli, &mut out);
    print!("{out}");
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("solowin: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Engine(e)) => {
            eprintln!("solowin: error: {e}");
            ExitCode::from(EXIT_ENGINE)
        }
    }
}

fn run(cli: &Cli, out: &mut String) -> Result<u8, Failure> {
    // Read scripts before touching the project so usage errors win.
    let script = match &cli.command {
        Command::Debug { script: Some(p), .. } => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Some(parse_script(&text).map_err(Failure::Usage)?)
        }
        _ => None,
    };
    let mut engine = Engine::open(&cli.root, cli.deterministic)?;
    match &cli.command {
        Command::Build => cmd_build(&mut engine, out),
        Command::Annotate { file, build } => {
            if *build {
                engine.build()?;
            }
            let rel = engine.workspace().resolve(file).map_err(EngineError::from)?;
            engine.open_document(&rel)?;
            out.push_str(&render::document(&engine, &rel, Detail::Full));
            Ok(0)
        }
        Command::Crumbs { mode, target, build } => {
            if *build {
                engine.build()?;
            }
            let trail = engine.trail(*mode, target)?;
            out.push_str(&render::trail(&trail));
            out.push('\n');
            Ok(0)
        }
        Command::Tasks => {
            for t in engine.tasks() {
                out.push_str(&render::task(t));
                out.push('\n');
            }
            out.push_str(&format!("tasks: {}\n", engine.tasks().len()));
            Ok(0)
        }
        Command::Symbols { file } => {
            for s in engine.symbols(file)? {
                out.push_str(&render::symbol(&s));
                out.push('\n');
            }
            Ok(0)
        }
        Command::Status { build } => {
            if *build {
                engine.build()?;
            }
            engine.refresh_vcs();
            for w in engine.status_widgets() {
                out.push_str(&render::widget(&w));
                out.push('\n');
            }
            for ev in engine.feed().history(usize::MAX) {
                out.push_str(&render::feed_event(ev));
                out.push('\n');
            }
            Ok(0)
        }
        Command::Debug { trace, steps, .. } => {
            let commands = script.unwrap_or_else(|| match steps {
                Some(n) => vec![ScriptCommand::Step(*n)],
                None => vec![ScriptCommand::Step(usize::MAX)],
            });
            cmd_debug(&mut engine, trace, &commands, out)
        }
    }
}

fn cmd_build(engine: &mut Engine, out: &mut String) -> Result<u8, Failure> {
    let outcome = engine.build_with(|ev| {
        if let Some(line) = render::build_event(ev) {
            out.push_str(&line);
            out.push('\n');
        }
    })?;
    let files: std::collections::BTreeSet<String> = engine
        .diagnostics()
        .iter()
        .filter(|d| d.is_error() || d.is_warning())
        .map(|d| d.file.clone())
        .collect();
    for f in &files {
        out.push_str(&render::document(engine, f, Detail::Excerpt));
    }
    Ok(if outcome.error_count > 0 { EXIT_BUILD_ERRORS } else { 0 })
}

fn cmd_debug(engine: &mut Engine, trace: &Path, commands: &[ScriptCommand], out: &mut String) -> Result<u8, Failure> {
    engine.load_trace(trace)?;
    let mut step = 0;
    for cmd in commands {
        match *cmd {
            ScriptCommand::Frame(t, f) => {
                if !engine.select_frame(t, f) {
                    out.push_str(&format!("no frame {t}/{f}\n"));
                    continue;
                }
                out.push_str(&format!("== frame {t} {f}\n"));
                if let Ok(trail) = engine.trail(Mode::CallStack, "") {
                    out.push_str(&format!("trail: {}\n", render::trail(&trail)));
                }
            }
            ScriptCommand::Step(n) => {
                for _ in 0..n {
                    step += 1;
                    if !debug_step(engine, step, out)? {
                        return Ok(0);
                    }
                }
            }
        }
    }
    Ok(0)
}

/// One transcript entry. Returns false once the trace is used up.
fn debug_step(engine: &mut Engine, step: usize, out: &mut String) -> Result<bool, Failure> {
    let report = match engine.step_debug() {
        Ok(r) => r,
        Err(EngineError::Debug(DebugError::SessionExhausted)) => {
            out.push_str("session exhausted\n");
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    out.push_str(&format!("== step {step}\n"));
    let event = match &report.event {
        DebugEvent::Stopped(snap) => {
            let mut s = String::from("stopped");
            if let Some(bp) = snap.stopped_breakpoint.and_then(|id| engine.breakpoints().get(id)) {
                s.push_str(&format!(" bp={} hits={}", bp.id, bp.hit_count));
            }
            if let Some(loc) = snap.stop_location() {
                s.push_str(&format!(" at {loc}"));
            }
            s
        }
        DebugEvent::Continued => "continued".into(),
        DebugEvent::Exited { code } => format!("exited code={code}"),
    };
    out.push_str(&format!("event: {event}\n"));
    out.push_str(&format!("mode: {}\n", engine.mode().name()));
    if let Some(ev) = engine.feed().current() {
        out.push_str(&format!("feed: {}\n", ev.text));
    }
    if let Ok(trail) = engine.trail(Mode::CallStack, "") {
        out.push_str(&format!("trail: {}\n", render::trail(&trail)));
    }
    if let Some(vars) = engine.variables() {
        for line in &vars.lines {
            out.push_str(line);
            out.push('\n');
        }
    }
    if let Some(bp) = engine.annotations().paused_at.clone() {
        let content = engine
            .widgets_for(&bp.file)
            .ok()
            .and_then(|ws| {
                ws.into_iter()
                    .find(|w| w.kind == solowin_core::inline::WidgetKind::BreakpointEditor)
            })
            .map(|w| w.content);
        if let Some(c) = content {
            out.push_str(&format!("editor: {} {c}\n", bp.location()));
        }
    }
    Ok(true)
}
