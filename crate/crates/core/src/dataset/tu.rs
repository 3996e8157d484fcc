use std::fs;
use std::path::{Path, PathBuf};

use super::{Graph, GraphDataset, Label};
use crate::error::{Error, Result};

/// Loads a dataset in the TU benchmark text layout.
///
/// Expects `<DS>_A.txt`, `<DS>_graph_indicator.txt` and
/// `<DS>_graph_labels.txt` in `dir`; `<DS>_node_labels.txt` is optional. The
/// prefix `<DS>` is taken from the single `*_A.txt` file in the directory.
pub fn load_tudataset(dir: impl AsRef<Path>) -> Result<GraphDataset> {
    let dir = dir.as_ref();
    let name = dataset_prefix(dir)?;
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));

    let indicator = read_column(&file("graph_indicator"))?;
    let graph_labels = read_column(&file("graph_labels"))?;
    let node_label_path = file("node_labels");
    let node_labels = if node_label_path.exists() {
        let labels = read_column(&node_label_path)?;
        if labels.len() != indicator.len() {
            return Err(Error::Integrity(format!(
                "{} node labels for {} nodes",
                labels.len(),
                indicator.len()
            )));
        }
        labels
    } else {
        vec![0; indicator.len()]
    };
    let edges = read_pairs(&file("A"))?;

    let graph_count = graph_labels.len();
    // node (0-based global) -> (graph index, local index)
    let mut local = Vec::with_capacity(indicator.len());
    let mut node_lists: Vec<Vec<Label>> = vec![Vec::new(); graph_count];
    for (node, &g) in indicator.iter().enumerate() {
        if g < 1 || g as usize > graph_count {
            return Err(Error::Integrity(format!(
                "node {} assigned to graph {g}, but only {graph_count} graph labels exist",
                node + 1
            )));
        }
        let gi = g as usize - 1;
        local.push((gi, node_lists[gi].len()));
        node_lists[gi].push(node_labels[node]);
    }

    let mut edge_lists: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for (line, (a, b)) in edges {
        let lookup = |v: i64| -> Result<(usize, usize)> {
            if v < 1 || v as usize > local.len() {
                return Err(Error::Integrity(format!(
                    "edge on line {line} references node {v}, absent from the graph indicator ({} nodes)",
                    local.len()
                )));
            }
            Ok(local[v as usize - 1])
        };
        let (ga, la) = lookup(a)?;
        let (gb, lb) = lookup(b)?;
        if ga != gb {
            return Err(Error::Integrity(format!(
                "edge on line {line} joins graphs {} and {}",
                ga + 1,
                gb + 1
            )));
        }
        edge_lists[ga].push((la, lb));
    }

    let graphs = node_lists
        .into_iter()
        .zip(edge_lists)
        .enumerate()
        .map(|(id, (labels, edges))| Graph::new(id, labels, edges))
        .collect::<Result<Vec<_>>>()?;
    GraphDataset::new(name, graphs, &graph_labels)
}

fn dataset_prefix(dir: &Path) -> Result<String> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut prefixes: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|s| s.strip_suffix("_A.txt"))
                .map(str::to_owned)
        })
        .collect();
    prefixes.sort();
    match prefixes.len() {
        1 => Ok(prefixes.pop().unwrap()),
        0 => Err(Error::Integrity(format!(
            "no <DS>_A.txt edge file in {}",
            dir.display()
        ))),
        _ => Err(Error::Integrity(format!(
            "several edge files in {}: {prefixes:?}",
            dir.display()
        ))),
    }
}

fn read_file(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

fn parse_int(path: &Path, line: usize, tok: &str) -> Result<i64> {
    // Some TU files store integral labels as floats ("1.0").
    tok.parse::<i64>()
        .ok()
        .or_else(|| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0 && v.is_finite())
                .map(|v| v as i64)
        })
        .ok_or_else(|| Error::Parse {
            file: file_name(path),
            line,
            msg: format!("expected an integer, found {tok:?}"),
        })
}

fn read_column(path: &PathBuf) -> Result<Vec<i64>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut toks = tokens(line);
        let Some(tok) = toks.next() else {
            continue;
        };
        let value = parse_int(path, i + 1, tok)?;
        if toks.next().is_some() {
            return Err(Error::Parse {
                file: file_name(path),
                line: i + 1,
                msg: "expected a single value".into(),
            });
        }
        out.push(value);
    }
    Ok(out)
}

fn read_pairs(path: &PathBuf) -> Result<Vec<(usize, (i64, i64))>> {
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = tokens(line).collect();
        match toks.as_slice() {
            [] => continue,
            [a, b] => out.push((
                i + 1,
                (parse_int(path, i + 1, a)?, parse_int(path, i + 1, b)?),
            )),
            _ => {
                return Err(Error::Parse {
                    file: file_name(path),
                    line: i + 1,
                    msg: format!("expected \"i, j\", found {line:?}"),
                })
            }
        }
    }
    Ok(out)
}
