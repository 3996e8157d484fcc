use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DfsCode, DfsEdge, Fragment, FrequentFragment};
use crate::error::{Error, Result};

const HEADER: &str = "# support\tcode";

/// Writes one fragment per line: support, a tab, then the code tuples
/// `(from,to,from_label,to_label)` separated by spaces.
pub fn write_fragments(path: impl AsRef<Path>, fragments: &[FrequentFragment]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_fragments(fragments)).map_err(|e| Error::io(path, e))
}

pub fn format_fragments(fragments: &[FrequentFragment]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for f in fragments {
        // `{:?}` on f64 prints the shortest representation that round-trips.
        writeln!(out, "{:?}\t{}", f.support, f.fragment.code).unwrap();
    }
    out
}

pub fn read_fragments(path: impl AsRef<Path>) -> Result<Vec<FrequentFragment>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fragments(&text, &path.display().to_string())
}

pub fn parse_fragments(text: &str, file: &str) -> Result<Vec<FrequentFragment>> {
    let err = |line: usize, msg: String| Error::Parse {
        file: file.to_string(),
        line,
        msg,
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (sup, code) = line
            .split_once('\t')
            .ok_or_else(|| err(line_no, "missing tab separator".into()))?;
        let support: f64 = sup
            .parse()
            .map_err(|_| err(line_no, format!("bad support {sup:?}")))?;
        let mut edges = Vec::new();
        for tuple in code.split_whitespace() {
            let inner = tuple
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| err(line_no, format!("bad tuple {tuple:?}")))?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 4 {
                return Err(err(line_no, format!("tuple {tuple:?} needs 4 fields")));
            }
            let num = |s: &str| -> Result<i64> {
                s.parse()
                    .map_err(|_| err(line_no, format!("bad integer {s:?}")))
            };
            let (from, to) = (num(parts[0])?, num(parts[1])?);
            if from < 0 || to < 0 || from == to {
                return Err(err(line_no, format!("bad indices in {tuple:?}")));
            }
            edges.push(DfsEdge {
                from: from as u32,
                to: to as u32,
                from_label: num(parts[2])?,
                to_label: num(parts[3])?,
            });
        }
        if edges.is_empty() {
            return Err(err(line_no, "empty code".into()));
        }
        let code = DfsCode(edges);
        code.to_graph(0).map_err(|e| err(line_no, e.to_string()))?;
        out.push(FrequentFragment {
            fragment: Fragment { code },
            support,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Graph;

    #[test]
    fn round_trip_is_exact() {
        let g = Graph::new(0, vec![6, 7, 8], [(0, 1), (1, 2), (0, 2)]).unwrap();
        let frags = vec![
            FrequentFragment {
                fragment: Fragment::from_graph(&g).unwrap(),
                support: 0.1 + 0.2,
            },
            FrequentFragment {
                fragment: Fragment::from_graph(&Graph::new(0, vec![-3, 2], [(0, 1)]).unwrap()).unwrap(),
                support: 1.0 / 3.0,
            },
        ];
        let text = format_fragments(&frags);
        let back = parse_fragments(&text, "mem").unwrap();
        assert_eq!(back, frags);
        assert_eq!(format_fragments(&back), text);
    }

    #[test]
    fn malformed_lines_fail_with_line_number() {
        let bad = "# support\tcode\n0.5\t(0,1,1,2)\n0.5 (0,1,1,2)\n";
        match parse_fragments(bad, "f").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }
}
