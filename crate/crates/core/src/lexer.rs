//! Comment and string-literal regions of C-like source, line by line.
//!
//! Block comments carry over line breaks; string and character literals end
//! at the end of their line if unterminated.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Code,
    /// Comment body, delimiters excluded.
    Comment,
    /// String or character literal, quotes included.
    Literal,
}

/// A byte range `[start, end)` of one line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub kind: RegionKind,
    pub start: usize,
    pub end: usize,
}

/// Splits every line into regions. Comment delimiters (`//`, `/*`, `*/`)
/// belong to no region.
pub fn regions<S: AsRef<str>>(lines: &[S]) -> Vec<Vec<Region>> {
    let mut in_block = false;
    lines
        .iter()
        .map(|line| lex_line(line.as_ref().as_bytes(), &mut in_block))
        .collect()
}

fn push(out: &mut Vec<Region>, kind: RegionKind, start: usize, end: usize) {
    if end > start {
        out.push(Region { kind, start, end });
    }
}

fn lex_line(b: &[u8], in_block: &mut bool) -> Vec<Region> {
    let mut out = Vec::new();
    let mut i = 0;
    let mut start = 0;
    if *in_block {
        match find(b, 0, b"*/") {
            Some(close) => {
                push(&mut out, RegionKind::Comment, 0, close);
                *in_block = false;
                i = close + 2;
                start = i;
            }
            None => {
                push(&mut out, RegionKind::Comment, 0, b.len());
                return out;
            }
        }
    }
    while i < b.len() {
        match b[i] {
            b'/' if b.get(i + 1) == Some(&b'/') => {
                push(&mut out, RegionKind::Code, start, i);
                push(&mut out, RegionKind::Comment, i + 2, b.len());
                return out;
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                push(&mut out, RegionKind::Code, start, i);
                match find(b, i + 2, b"*/") {
                    Some(close) => {
                        push(&mut out, RegionKind::Comment, i + 2, close);
                        i = close + 2;
                        start = i;
                    }
                    None => {
                        push(&mut out, RegionKind::Comment, i + 2, b.len());
                        *in_block = true;
                        return out;
                    }
                }
            }
            b'\'' if i > 0 && b[i - 1].is_ascii_digit() => {
                // digit separator, as in 1'000
                i += 1;
            }
            q @ (b'"' | b'\'') => {
                push(&mut out, RegionKind::Code, start, i);
                let mut j = i + 1;
                while j < b.len() {
                    match b[j] {
                        b'\\' => j += 2,
                        c if c == q => {
                            j += 1;
                            break;
                        }
                        _ => j += 1,
                    }
                }
                let end = j.min(b.len());
                push(&mut out, RegionKind::Literal, i, end);
                i = end;
                start = i;
            }
            _ => i += 1,
        }
    }
    push(&mut out, RegionKind::Code, start, b.len());
    out
}

fn find(b: &[u8], from: usize, pat: &[u8]) -> Option<usize> {
    b.get(from..)?
        .windows(pat.len())
        .position(|w| w == pat)
        .map(|p| p + from)
}

/// The line with comments and literals blanked out. Literals become a
/// single `0` so that initializers keep a token.
pub fn code_only(line: &str, regions: &[Region]) -> String {
    let mut out = String::with_capacity(line.len());
    let mut pos = 0;
    for r in regions {
        if r.start > pos {
            out.push(' ');
        }
        match r.kind {
            RegionKind::Code => out.push_str(&line[r.start..r.end]),
            RegionKind::Literal => out.push_str(" 0 "),
            RegionKind::Comment => out.push(' '),
        }
        pos = r.end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(line: &str) -> Vec<(RegionKind, &str)> {
        let rs = regions(&[line]);
        rs[0].iter().map(|r| (r.kind, &line[r.start..r.end])).collect()
    }

    #[test]
    fn line_comment() {
        assert_eq!(
            kinds("int x; // TODO y"),
            vec![(RegionKind::Code, "int x; "), (RegionKind::Comment, " TODO y")]
        );
    }

    #[test]
    fn string_hides_comment_markers() {
        assert_eq!(
            kinds(r#"s = "/* not */ // x"; /* c */"#),
            vec![
                (RegionKind::Code, "s = "),
                (RegionKind::Literal, r#""/* not */ // x""#),
                (RegionKind::Code, "; "),
                (RegionKind::Comment, " c "),
            ]
        );
        assert_eq!(
            kinds(r#"c = '"'; // q"#),
            vec![
                (RegionKind::Code, "c = "),
                (RegionKind::Literal, "'\"'"),
                (RegionKind::Code, "; "),
                (RegionKind::Comment, " q"),
            ]
        );
        assert_eq!(kinds(r#""a\"b" x"#)[1], (RegionKind::Code, " x"));
    }

    #[test]
    fn block_comment_spans_lines() {
        let lines = ["a /* one", "two", "three */ b"];
        let rs = regions(&lines);
        assert_eq!(
            rs[1],
            vec![Region {
                kind: RegionKind::Comment,
                start: 0,
                end: 3
            }]
        );
        assert_eq!(
            rs[2][0],
            Region {
                kind: RegionKind::Comment,
                start: 0,
                end: 6
            }
        );
        assert_eq!(rs[2][1].kind, RegionKind::Code);
    }

    #[test]
    fn code_only_blanks_comments_and_literals() {
        let line = r#"char *s = "x"; /* c */ int y;"#;
        let rs = regions(&[line]);
        let code = code_only(line, &rs[0]);
        assert_eq!(
            code.split_whitespace().collect::<Vec<_>>(),
            ["char", "*s", "=", "0", ";", "int", "y;"]
        );
    }

    #[test]
    fn digit_separator_is_not_a_literal() {
        assert_eq!(kinds("int n = 1'000; // x")[0], (RegionKind::Code, "int n = 1'000; "));
    }
}
