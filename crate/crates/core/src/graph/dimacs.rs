use std::fmt::Write as _;
use std::io::BufRead;

use super::Graph;
use crate::error::{Error, Result};

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a DIMACS `.col` graph (`c` comments, one `p edge n m` header,
/// 1-based `e u v` lines). Repeated edges in either orientation are merged.
pub fn parse_dimacs(reader: impl BufRead) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut pairs = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        match tag {
            "c" => {}
            "p" => {
                if n.is_some() {
                    return Err(parse_error(lineno, "duplicate problem line"));
                }
                let format = fields.next();
                if !matches!(format, Some("edge") | Some("col")) {
                    return Err(parse_error(lineno, "expected `p edge <n> <m>`"));
                }
                let count = fields
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_error(lineno, "missing or invalid vertex count"))?;
                fields
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| parse_error(lineno, "missing or invalid edge count"))?;
                n = Some(count);
            }
            "e" => {
                let count = n.ok_or_else(|| parse_error(lineno, "edge before problem line"))?;
                let mut endpoint = || -> Result<usize> {
                    let v = fields
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| parse_error(lineno, "malformed edge line"))?;
                    if v == 0 || v > count {
                        return Err(parse_error(
                            lineno,
                            format!("vertex {v} outside [1, {count}]"),
                        ));
                    }
                    Ok(v - 1)
                };
                let u = endpoint()?;
                let v = endpoint()?;
                if u == v {
                    return Err(parse_error(lineno, format!("self-loop at vertex {}", u + 1)));
                }
                pairs.push((u, v));
            }
            other => {
                return Err(parse_error(lineno, format!("unknown line type `{other}`")));
            }
        }
    }

    let n = n.ok_or_else(|| parse_error(0, "missing `p edge` header"))?;
    Graph::new(n, pairs)
}

/// Writes `g` in DIMACS `.col` format with 1-based vertices.
pub fn emit_dimacs(g: &Graph, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(text) = comment {
        for line in text.lines() {
            let _ = writeln!(out, "c {line}");
        }
    }
    let _ = writeln!(out, "p edge {} {}", g.n(), g.num_edges());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Graph> {
        parse_dimacs(s.as_bytes())
    }

    #[test]
    fn path_transcription() {
        let g = parse("p edge 3 2\ne 1 2\ne 2 3").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn reversed_duplicate_is_merged() {
        let g = parse("p edge 3 3\ne 1 2\ne 2 1\ne 1 3").unwrap();
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse("c hello\n\nc world\np edge 2 1\ne 1 2\n").unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn edge_before_header_names_line() {
        let err = parse("e 1 2\np edge 2 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn out_of_range_vertex() {
        let err = parse("p edge 2 1\ne 1 3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(matches!(parse("p edge 2 1\ne 0 1"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn malformed_header_and_missing_header() {
        assert!(matches!(parse("p edge x 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("p cnf 3 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse("c only a comment"), Err(Error::Parse { .. })));
    }

    #[test]
    fn emit_then_parse() {
        let g = Graph::cycle(5);
        let text = emit_dimacs(&g, Some("five cycle"));
        assert!(text.starts_with("c five cycle\np edge 5 5\n"));
        let back = parse(&text).unwrap();
        assert_eq!(back.edges(), g.edges());
    }
}
