//! Minimal DFS codes for connected node-labeled graphs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{Graph, Label};
use crate::error::{Error, Result};

/// One edge of a DFS code: discovery indices of both endpoints plus their
/// labels. `from < to` for forward (tree) edges, `from > to` for backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DfsEdge {
    pub from: u32,
    pub to: u32,
    pub from_label: Label,
    pub to_label: Label,
}

impl DfsEdge {
    pub fn is_forward(&self) -> bool {
        self.from < self.to
    }
}

/// A DFS code. The derived ordering is plain lexicographic over the tuples
/// and is only used to sort fragments deterministically; minimality is
/// defined by [`canonical_code`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DfsCode(pub Vec<DfsEdge>);

impl DfsCode {
    pub fn edge_count(&self) -> usize {
        self.0.len()
    }

    pub fn node_count(&self) -> usize {
        self.0
            .iter()
            .map(|e| e.from.max(e.to) as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Rebuilds the graph the code describes; node `i` is the `i`-th
    /// discovered vertex.
    pub fn to_graph(&self, id: usize) -> Result<Graph> {
        let n = self.node_count();
        let mut labels: Vec<Option<Label>> = vec![None; n];
        for e in &self.0 {
            for (v, l) in [(e.from, e.from_label), (e.to, e.to_label)] {
                match labels[v as usize] {
                    Some(prev) if prev != l => {
                        return Err(Error::Format(format!(
                            "node {v} carries labels {prev} and {l}"
                        )))
                    }
                    _ => labels[v as usize] = Some(l),
                }
            }
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or_else(|| Error::Format(format!("node {v} never appears"))))
            .collect::<Result<Vec<_>>>()?;
        Graph::new(
            id,
            labels,
            self.0.iter().map(|e| (e.from as usize, e.to as usize)),
        )
    }
}

impl fmt::Display for DfsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({},{},{},{})", e.from, e.to, e.from_label, e.to_label)?;
        }
        Ok(())
    }
}

/// Partial DFS traversal of the input graph consistent with a code prefix.
#[derive(Clone)]
struct Embedding {
    /// graph vertex -> discovery index
    index_of: Vec<Option<u32>>,
    /// discovery index -> graph vertex
    vertex_at: Vec<usize>,
    /// discovery indices from the root to the rightmost vertex
    rightmost_path: Vec<u32>,
    used: Vec<bool>,
}

/// Extension ranking key: backward edges (kind 0) sort before forward ones;
/// backward by target index, forward by deepest source then target label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ExtKey {
    Backward { to: u32 },
    Forward { depth_rank: std::cmp::Reverse<u32>, to_label: Label },
}

fn edge_index(g: &Graph, a: usize, b: usize) -> usize {
    g.edges()
        .binary_search(&(a.min(b), a.max(b)))
        .expect("edge exists")
}

/// Computes the minimum DFS code of a connected graph with at least one edge.
///
/// The code is built one tuple at a time; at each step every partial
/// traversal that produced the current minimal prefix is extended along the
/// rightmost path and only those reaching the smallest next tuple survive.
/// Two graphs get equal codes exactly when they are label-preserving
/// isomorphic.
pub fn canonical_code(g: &Graph) -> Result<DfsCode> {
    if g.edge_count() == 0 {
        return Err(Error::Format("a fragment needs at least one edge".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.node_count();
    let m = g.edge_count();

    let mut first: Option<(Label, Label)> = None;
    for &(a, b) in g.edges() {
        for (u, v) in [(a, b), (b, a)] {
            let key = (g.label(u), g.label(v));
            if first.is_none_or(|f| key < f) {
                first = Some(key);
            }
        }
    }
    let (la, lb) = first.expect("at least one edge");
    let mut code = vec![DfsEdge { from: 0, to: 1, from_label: la, to_label: lb }];
    let mut frontier: Vec<Embedding> = Vec::new();
    for &(a, b) in g.edges() {
        for (u, v) in [(a, b), (b, a)] {
            if (g.label(u), g.label(v)) == (la, lb) {
                let mut index_of = vec![None; n];
                index_of[u] = Some(0);
                index_of[v] = Some(1);
                let mut used = vec![false; m];
                used[edge_index(g, u, v)] = true;
                frontier.push(Embedding {
                    index_of,
                    vertex_at: vec![u, v],
                    rightmost_path: vec![0, 1],
                    used,
                });
            }
        }
    }

    while code.len() < m {
        let mut best: Option<ExtKey> = None;
        let mut next: Vec<Embedding> = Vec::new();
        for emb in &frontier {
            for (key, ext) in extensions(g, emb) {
                match best {
                    Some(b) if key > b => continue,
                    Some(b) if key < b => {
                        next.clear();
                        best = Some(key);
                    }
                    None => best = Some(key),
                    _ => {}
                }
                next.push(ext);
            }
        }
        let key = best.expect("connected graph always has a rightmost extension");
        let sample = &next[0];
        let edge = match key {
            ExtKey::Backward { to } => {
                let from = *sample.rightmost_path.last().unwrap();
                DfsEdge {
                    from,
                    to,
                    from_label: g.label(sample.vertex_at[from as usize]),
                    to_label: g.label(sample.vertex_at[to as usize]),
                }
            }
            ExtKey::Forward { depth_rank, to_label } => {
                let from = depth_rank.0;
                DfsEdge {
                    from,
                    to: sample.vertex_at.len() as u32 - 1,
                    from_label: g.label(sample.vertex_at[from as usize]),
                    to_label,
                }
            }
        };
        code.push(edge);
        frontier = next;
    }
    Ok(DfsCode(code))
}

fn extensions(g: &Graph, emb: &Embedding) -> Vec<(ExtKey, Embedding)> {
    let mut out = Vec::new();
    let rightmost = *emb.rightmost_path.last().unwrap();
    let r = emb.vertex_at[rightmost as usize];
    for &w in g.neighbors(r) {
        if let Some(wi) = emb.index_of[w] {
            let e = edge_index(g, r, w);
            if !emb.used[e] {
                let mut ext = emb.clone();
                ext.used[e] = true;
                out.push((ExtKey::Backward { to: wi }, ext));
            }
        }
    }
    if !out.is_empty() {
        // Any backward edge outranks every forward one.
        return out;
    }
    let new_index = emb.vertex_at.len() as u32;
    for (pos, &ui) in emb.rightmost_path.iter().enumerate().rev() {
        let u = emb.vertex_at[ui as usize];
        for &w in g.neighbors(u) {
            if emb.index_of[w].is_none() {
                let mut ext = emb.clone();
                ext.index_of[w] = Some(new_index);
                ext.vertex_at.push(w);
                ext.rightmost_path.truncate(pos + 1);
                ext.rightmost_path.push(new_index);
                ext.used[edge_index(g, u, w)] = true;
                out.push((
                    ExtKey::Forward {
                        depth_rank: std::cmp::Reverse(ui),
                        to_label: g.label(w),
                    },
                    ext,
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(labels: &[Label], edges: &[(usize, usize)]) -> Graph {
        Graph::new(0, labels.to_vec(), edges.iter().copied()).unwrap()
    }

    #[test]
    fn single_edge_symmetry() {
        let ab = canonical_code(&graph(&[1, 2], &[(0, 1)])).unwrap();
        let ba = canonical_code(&graph(&[2, 1], &[(0, 1)])).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(ab.to_string(), "(0,1,1,2)");
    }

    #[test]
    fn path_and_triangle_differ() {
        let path = canonical_code(&graph(&[0, 1, 2], &[(0, 1), (1, 2)])).unwrap();
        let tri = canonical_code(&graph(&[0, 1, 2], &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_ne!(path, tri);
        assert_eq!(tri.edge_count(), 3);
        assert!(!tri.0[2].is_forward());
    }

    #[test]
    fn disconnected_rejected() {
        let g = graph(&[0, 0, 0, 0], &[(0, 1), (2, 3)]);
        assert!(matches!(canonical_code(&g), Err(Error::Disconnected)));
    }

    #[test]
    fn code_round_trips_through_graph() {
        let g = graph(&[6, 6, 7, 8, 8], &[(0, 1), (1, 2), (2, 3), (2, 4), (0, 2)]);
        let code = canonical_code(&g).unwrap();
        let rebuilt = code.to_graph(0).unwrap();
        assert_eq!(canonical_code(&rebuilt).unwrap(), code);
        assert_eq!(code.node_count(), 5);
    }
}
