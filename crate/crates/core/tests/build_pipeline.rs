//! The build runner's streamed diagnostics agree with parsing the captured
//! output offline, and with counts known from how the output was generated.

use proptest::prelude::*;
use solowin_core::buildrun::{start_build, BuildEvent};
use solowin_core::diagnostics::{counts, parse_stream, IgnoreStore};

#[derive(Clone, Debug)]
enum Out {
    Error(u8, u8),
    Warning(u8, u8),
    Note(u8),
    Noise(u8),
}

fn out_line() -> impl Strategy<Value = Out> {
    prop_oneof![
        (1u8..50, 0u8..4).prop_map(|(l, f)| Out::Error(l, f)),
        (1u8..50, 0u8..4).prop_map(|(l, f)| Out::Warning(l, f)),
        (1u8..50).prop_map(Out::Note),
        any::<u8>().prop_map(Out::Noise),
    ]
}

fn text(o: &Out) -> String {
    match o {
        Out::Error(l, f) => format!("src/f{f}.c:{l}:2: error: bad thing {l}"),
        Out::Warning(l, f) => format!("src/f{f}.c:{l}: warning: odd thing {l}"),
        Out::Note(l) => format!("src/f0.c:{l}: note: see here"),
        Out::Noise(n) => format!("[{n}%] building object {n}.o"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn streamed_diagnostics_match_offline_parse(lines in prop::collection::vec(out_line(), 0..40), code in 0i32..3) {
        let dir = tempfile::tempdir().unwrap();
        let body: String = lines.iter().map(|o| format!("{}\n", text(o))).collect();
        std::fs::write(dir.path().join("out.txt"), body).unwrap();
        let cmd: Vec<String> = ["sh", "-c", &format!("cat out.txt; exit {code}")].iter().map(|s| s.to_string()).collect();
        let (events, outcome) = start_build(&cmd, dir.path(), IgnoreStore::default()).unwrap().collect();

        let streamed: Vec<String> = events
            .iter()
            .filter_map(|e| match e {
                BuildEvent::OutputLine(l) => Some(l.clone()),
                _ => None,
            })
            .collect();
        prop_assert_eq!(&streamed, &outcome.lines);
        prop_assert_eq!(outcome.diagnostics.clone(), parse_stream(&outcome.lines));

        let errors = lines.iter().filter(|o| matches!(o, Out::Error(..))).count();
        let warnings = lines.iter().filter(|o| matches!(o, Out::Warning(..))).count();
        prop_assert_eq!(counts(&outcome.diagnostics), (errors, warnings));
        prop_assert_eq!((outcome.error_count, outcome.warning_count), (errors, warnings));
        prop_assert_eq!(outcome.exit_code, code);
        prop_assert_eq!(
            events.last(),
            Some(&BuildEvent::Finished { exit_code: code, error_count: errors, warning_count: warnings })
        );
    }
}

#[test]
fn stderr_lines_are_captured_too() {
    let dir = tempfile::tempdir().unwrap();
    let cmd: Vec<String> = ["sh", "-c", "echo 'a.c:1: error: out'; echo 'b.c:2: warning: err' >&2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (_, outcome) = start_build(&cmd, dir.path(), IgnoreStore::default()).unwrap().collect();
    let mut files: Vec<_> = outcome.diagnostics.iter().map(|d| d.file.as_str()).collect();
    files.sort();
    assert_eq!(files, ["a.c", "b.c"]);
}
