//! Labeled graph datasets: the in-memory model, the TU text-format loader,
//! and deterministic stratified splitting.

mod split;
mod tu;

use sha2::{Digest, Sha256};

pub use split::{stratified_kfold, stratified_sample, Fold, SplitConfig};
pub use tu::load_tudataset;

use crate::error::{Error, Result};

/// Node label value. Datasets without a node-label file use 0 everywhere.
pub type Label = i64;

/// A simple undirected node-labeled graph.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted; adjacency lists
/// are sorted as well so iteration order is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub id: usize,
    labels: Vec<Label>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, dropping self-loops and duplicate or reversed edges.
    pub fn new(id: usize, labels: Vec<Label>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Integrity(format!("graph {id} has no nodes")));
        }
        let n = labels.len();
        let mut norm = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Integrity(format!(
                    "graph {id}: edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if a != b {
                norm.push((a.min(b), a.max(b)));
            }
        }
        norm.sort_unstable();
        norm.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &norm {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            id,
            labels,
            edges: norm,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: usize) -> Label {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// True when every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }
}

/// An ordered collection of graphs with contiguous class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Class index in `0..class_count` per graph.
    pub labels: Vec<usize>,
    pub class_count: usize,
    /// Original label value for each class index.
    pub original_labels: Vec<i64>,
}

impl GraphDataset {
    /// Builds a dataset from raw class values, remapping them to `0..K` in
    /// ascending order of the original value.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, raw_labels: &[i64]) -> Result<Self> {
        if graphs.len() != raw_labels.len() {
            return Err(Error::LengthMismatch(graphs.len(), raw_labels.len()));
        }
        if graphs.is_empty() {
            return Err(Error::Integrity("dataset has no graphs".into()));
        }
        let mut original: Vec<i64> = raw_labels.to_vec();
        original.sort_unstable();
        original.dedup();
        let labels = raw_labels
            .iter()
            .map(|v| original.binary_search(v).expect("value present"))
            .collect();
        Ok(GraphDataset {
            name: name.into(),
            graphs,
            labels,
            class_count: original.len(),
            original_labels: original,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub fn mean_node_count(&self) -> f64 {
        let total: usize = self.graphs.iter().map(Graph::node_count).sum();
        total as f64 / self.len() as f64
    }

    /// Graph ids of every class, ascending.
    pub fn ids_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.class_count];
        for (i, &y) in self.labels.iter().enumerate() {
            by_class[y].push(i);
        }
        by_class
    }

    /// A restriction of the dataset to `ids`, renumbered `0..ids.len()`.
    /// Class indices are kept as they are in the parent.
    pub fn subset(&self, ids: &[usize]) -> GraphDataset {
        let graphs = ids
            .iter()
            .enumerate()
            .map(|(new_id, &i)| {
                let mut g = self.graphs[i].clone();
                g.id = new_id;
                g
            })
            .collect();
        GraphDataset {
            name: self.name.clone(),
            graphs,
            labels: ids.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            original_labels: self.original_labels.clone(),
        }
    }

    /// SHA-256 over the dataset content, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.graphs.len() as u64).to_le_bytes());
        for (g, y) in self.graphs.iter().zip(&self.labels) {
            hasher.update((*y as u64).to_le_bytes());
            hasher.update((g.node_count() as u64).to_le_bytes());
            for l in g.labels() {
                hasher.update(l.to_le_bytes());
            }
            hasher.update((g.edge_count() as u64).to_le_bytes());
            for &(a, b) in g.edges() {
                hasher.update((a as u64).to_le_bytes());
                hasher.update((b as u64).to_le_bytes());
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
