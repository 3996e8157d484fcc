//! Frequent connected-fragment mining.
//!
//! Fragments grow one edge per level. Every candidate is canonicalized by its
//! minimum DFS code, discarded unless all of its one-edge-smaller connected
//! sub-fragments were frequent, and then counted only in graphs that contain
//! all of those sub-fragments.

mod code;
mod io;
mod iso;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use code::{canonical_code, DfsCode, DfsEdge};
pub use io::{read_fragments, write_fragments};
pub use iso::contains;

use crate::dataset::{Graph, GraphDataset, Label};
use crate::error::{Error, Result};
use crate::par::*;

/// A connected fragment identified by its minimum DFS code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fragment {
    pub code: DfsCode,
}

impl Fragment {
    pub fn from_graph(g: &Graph) -> Result<Self> {
        Ok(Fragment {
            code: canonical_code(g)?,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.code.edge_count()
    }

    pub fn node_count(&self) -> usize {
        self.code.node_count()
    }

    pub fn to_graph(&self) -> Graph {
        self.code.to_graph(0).expect("canonical codes describe valid graphs")
    }
}

/// A fragment together with its dataset support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentFragment {
    pub fragment: Fragment,
    pub support: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// min-sup threshold
    pub theta: f64,
    pub max_edges: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            theta: 0.95,
            max_edges: 5,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("min-sup {} outside [0, 1]", self.theta)));
        }
        if self.max_edges < 1 {
            return Err(Error::Config("max_edges must be at least 1".into()));
        }
        Ok(())
    }
}

/// Indices (into the global frequent-fragment list) contained in one graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentDecomposition {
    pub graph_id: usize,
    pub fragment_ids: Vec<usize>,
}

impl FragmentDecomposition {
    pub fn is_empty(&self) -> bool {
        self.fragment_ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.fragment_ids.len()
    }
}

fn is_frequent(count: usize, total: usize, theta: f64) -> bool {
    count > 0 && count as f64 / total as f64 >= theta
}

/// Fraction of graphs in `dataset` containing `fragment`.
pub fn support(fragment: &Fragment, dataset: &GraphDataset) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    let pattern = fragment.to_graph();
    let count = dataset
        .graphs
        .par_iter()
        .filter(|g| contains(g, &pattern))
        .count();
    count as f64 / dataset.len() as f64
}

/// The connected sub-fragments obtained by deleting one edge (and a vertex
/// left isolated by it). Disconnected remainders are skipped.
fn one_edge_smaller(g: &Graph) -> Vec<Graph> {
    let mut out = Vec::new();
    for (skip, &(a, b)) in g.edges().iter().enumerate() {
        let mut keep = vec![true; g.node_count()];
        if g.degree(a) == 1 {
            keep[a] = false;
        }
        if g.degree(b) == 1 {
            keep[b] = false;
        }
        let mut remap = vec![usize::MAX; g.node_count()];
        let mut labels = Vec::new();
        for v in 0..g.node_count() {
            if keep[v] {
                remap[v] = labels.len();
                labels.push(g.label(v));
            }
        }
        let edges: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &(x, y))| (remap[x], remap[y]))
            .collect();
        if edges.is_empty() {
            continue;
        }
        let sub = Graph::new(0, labels, edges).expect("remapped edges are in range");
        if sub.is_connected() {
            out.push(sub);
        }
    }
    out
}

struct Level {
    /// code -> ids of graphs containing the fragment
    occurrences: BTreeMap<Fragment, Vec<usize>>,
}

/// Mines every connected fragment with at most `max_edges` edges whose
/// support reaches `theta` (and which occurs in at least one graph).
/// Output is sorted by code.
pub fn mine_frequent_fragments(
    dataset: &GraphDataset,
    config: &MiningConfig,
) -> Result<Vec<FrequentFragment>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Config("cannot mine an empty dataset".into()));
    }
    let total = dataset.len();

    // Level 1: single labeled edges.
    let mut edge_graphs: BTreeMap<(Label, Label), BTreeSet<usize>> = BTreeMap::new();
    for (gi, g) in dataset.graphs.iter().enumerate() {
        for &(a, b) in g.edges() {
            let (la, lb) = (g.label(a), g.label(b));
            edge_graphs.entry((la.min(lb), la.max(lb))).or_default().insert(gi);
        }
    }
    let mut level = Level {
        occurrences: BTreeMap::new(),
    };
    let mut frequent_pairs: BTreeSet<(Label, Label)> = BTreeSet::new();
    for ((la, lb), graphs) in &edge_graphs {
        if is_frequent(graphs.len(), total, config.theta) {
            frequent_pairs.insert((*la, *lb));
            let g = Graph::new(0, vec![*la, *lb], [(0, 1)])?;
            level
                .occurrences
                .insert(Fragment::from_graph(&g)?, graphs.iter().copied().collect());
        }
    }
    let mut alphabet: BTreeSet<Label> = BTreeSet::new();
    for &(a, b) in &frequent_pairs {
        alphabet.insert(a);
        alphabet.insert(b);
    }

    let mut all: Vec<(Fragment, usize)> = level
        .occurrences
        .iter()
        .map(|(f, occ)| (f.clone(), occ.len()))
        .collect();

    for _edges in 2..=config.max_edges {
        if level.occurrences.is_empty() {
            break;
        }
        // Candidate generation, deduplicated by canonical code.
        let mut candidates: BTreeMap<Fragment, Graph> = BTreeMap::new();
        for parent in level.occurrences.keys() {
            let g = parent.to_graph();
            let n = g.node_count();
            for u in 0..n {
                for &l in &alphabet {
                    let pair = (g.label(u).min(l), g.label(u).max(l));
                    if !frequent_pairs.contains(&pair) {
                        continue;
                    }
                    let mut labels = g.labels().to_vec();
                    labels.push(l);
                    let edges = g.edges().iter().copied().chain([(u, n)]);
                    let child = Graph::new(0, labels, edges)?;
                    candidates.entry(Fragment::from_graph(&child)?).or_insert(child);
                }
                for v in u + 1..n {
                    if g.has_edge(u, v) {
                        continue;
                    }
                    let pair = (g.label(u).min(g.label(v)), g.label(u).max(g.label(v)));
                    if !frequent_pairs.contains(&pair) {
                        continue;
                    }
                    let edges = g.edges().iter().copied().chain([(u, v)]);
                    let child = Graph::new(0, g.labels().to_vec(), edges)?;
                    candidates.entry(Fragment::from_graph(&child)?).or_insert(child);
                }
            }
        }

        let candidates: Vec<(Fragment, Graph)> = candidates.into_iter().collect();
        let counted: Vec<Option<(Fragment, Vec<usize>)>> = candidates
            .par_iter()
            .map(|(frag, g)| {
                // Anti-monotone pruning: every smaller connected piece must be frequent.
                let mut pool: Option<Vec<usize>> = None;
                for sub in one_edge_smaller(g) {
                    let code = Fragment::from_graph(&sub).expect("connected sub-fragment");
                    let occ = level.occurrences.get(&code)?;
                    pool = Some(match pool {
                        None => occ.clone(),
                        Some(p) => intersect(&p, occ),
                    });
                }
                let pool = pool.expect("fragments with two or more edges have a connected sub-fragment");
                if !is_frequent(pool.len(), total, config.theta) {
                    return None;
                }
                let occ: Vec<usize> = pool
                    .into_iter()
                    .filter(|&gi| contains(&dataset.graphs[gi], g))
                    .collect();
                is_frequent(occ.len(), total, config.theta).then(|| (frag.clone(), occ))
            })
            .collect();

        level = Level {
            occurrences: counted.into_iter().flatten().collect(),
        };
        all.extend(level.occurrences.iter().map(|(f, occ)| (f.clone(), occ.len())));
    }

    all.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(all
        .into_iter()
        .map(|(fragment, count)| FrequentFragment {
            fragment,
            support: count as f64 / total as f64,
        })
        .collect())
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Indices of all `fragments` contained in `graph`.
pub fn decompose(graph: &Graph, fragments: &[FrequentFragment]) -> FragmentDecomposition {
    let patterns: Vec<Graph> = fragments.iter().map(|f| f.fragment.to_graph()).collect();
    decompose_with(graph, &patterns)
}

fn decompose_with(graph: &Graph, patterns: &[Graph]) -> FragmentDecomposition {
    FragmentDecomposition {
        graph_id: graph.id,
        fragment_ids: patterns
            .iter()
            .enumerate()
            .filter(|(_, p)| contains(graph, p))
            .map(|(i, _)| i)
            .collect(),
    }
}

/// Decomposes every graph of `dataset`, in parallel over graphs.
pub fn decompose_all(
    dataset: &GraphDataset,
    fragments: &[FrequentFragment],
) -> Vec<FragmentDecomposition> {
    let patterns: Vec<Graph> = fragments.iter().map(|f| f.fragment.to_graph()).collect();
    dataset
        .graphs
        .par_iter()
        .map(|g| decompose_with(g, &patterns))
        .collect()
}
