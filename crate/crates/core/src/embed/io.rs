use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::EmbeddingTable;
use crate::error::{Error, Result};

/// Text layout: a header line `dim N_frag N_graph`, then `N_frag` fragment
/// lines and `N_graph` graph lines, each `id v1 ... v_dim`. Values carry 17
/// significant digits so a reload reproduces them exactly.
pub fn write_table(path: impl AsRef<Path>, table: &EmbeddingTable) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_table(table)).map_err(|e| Error::io(path, e))
}

pub fn format_table(table: &EmbeddingTable) -> String {
    let mut out = format!(
        "{} {} {}\n",
        table.dim,
        table.fragment_vectors.len(),
        table.graph_vectors.len()
    );
    for section in [&table.fragment_vectors, &table.graph_vectors] {
        for (id, v) in section.iter().enumerate() {
            write!(out, "{id}").unwrap();
            for x in v {
                write!(out, " {x:.16e}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn read_table(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}

pub fn parse_table(text: &str, file: &str) -> Result<EmbeddingTable> {
    let err = |line: usize, msg: String| Error::Parse {
        file: file.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(1, format!("bad header token {t:?}"))))
        .collect::<Result<_>>()?;
    let [dim, n_frag, n_graph] = head[..] else {
        return Err(err(1, "header must be `dim N_frag N_graph`".into()));
    };
    let mut read_section = |count: usize| -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(count);
        for expected_id in 0..count {
            let (i, line) = lines
                .next()
                .ok_or_else(|| err(0, "file ends before all vectors were read".into()))?;
            let mut toks = line.split_whitespace();
            let id: usize = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(i + 1, "missing id".into()))?;
            if id != expected_id {
                return Err(err(i + 1, format!("expected id {expected_id}, found {id}")));
            }
            let v: Vec<f64> = toks
                .map(|t| t.parse().map_err(|_| err(i + 1, format!("bad value {t:?}"))))
                .collect::<Result<_>>()?;
            if v.len() != dim {
                return Err(err(i + 1, format!("expected {dim} values, found {}", v.len())));
            }
            out.push(v);
        }
        Ok(out)
    };
    let fragment_vectors = read_section(n_frag)?;
    let graph_vectors = read_section(n_graph)?;
    Ok(EmbeddingTable {
        dim,
        fragment_vectors,
        graph_vectors,
    })
}
