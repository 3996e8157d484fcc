//! PV-DBOW fragment embeddings.
//!
//! Graphs play the role of documents and their frequent fragments the role of
//! words. Each graph vector is trained to predict the fragments of its
//! decomposition through a dot-product softmax, approximated here by negative
//! sampling. The output-side fragment vectors are the ones the softmax scores
//! against, and they become the points of each graph's cloud.

mod io;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use io::{read_table, write_table};

use crate::error::{Error, Result};
use crate::mining::FragmentDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub dim: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            dim: 16,
            epochs: 100,
            negatives: 5,
            lr_start: 0.025,
            lr_end: 0.0001,
            seed: 0,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.epochs < 1 || self.negatives < 1 {
            return Err(Error::Config(
                "dim, epochs and negatives must all be at least 1".into(),
            ));
        }
        if !(self.lr_end > 0.0 && self.lr_start >= self.lr_end) {
            return Err(Error::Config(format!(
                "learning rates need lr_start >= lr_end > 0 (got {} and {})",
                self.lr_start, self.lr_end
            )));
        }
        Ok(())
    }
}

/// Learned vectors, indexed by fragment id and by graph id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub fragment_vectors: Vec<Vec<f64>>,
    pub graph_vectors: Vec<Vec<f64>>,
}

/// The point cloud of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    pub graph_id: usize,
    pub points: Vec<Vec<f64>>,
}

impl VectorSet {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `-ln σ(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Negative-sampling loss of one (graph, positive fragment, negatives) triple:
/// `-ln σ(f·g) - Σ ln σ(-n·g)`.
pub fn triple_loss(graph: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    neg_log_sigmoid(dot(positive, graph))
        + negatives
            .iter()
            .map(|n| neg_log_sigmoid(-dot(n, graph)))
            .sum::<f64>()
}

/// Gradient of [`triple_loss`] with respect to the graph vector, the positive
/// fragment vector, and each negative fragment vector.
pub fn triple_gradient(
    graph: &[f64],
    positive: &[f64],
    negatives: &[&[f64]],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let pos_coef = sigmoid(dot(positive, graph)) - 1.0;
    let mut grad_graph: Vec<f64> = positive.iter().map(|p| pos_coef * p).collect();
    let grad_pos: Vec<f64> = graph.iter().map(|g| pos_coef * g).collect();
    let mut grad_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let coef = sigmoid(dot(n, graph));
        for (gg, nv) in grad_graph.iter_mut().zip(n.iter()) {
            *gg += coef * nv;
        }
        grad_negs.push(graph.iter().map(|g| coef * g).collect());
    }
    (grad_graph, grad_pos, grad_negs)
}

fn init_vectors(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let half = 0.5 / dim as f64;
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-half..half)).collect())
        .collect()
}

/// Trains PV-DBOW over `decompositions`; see [`train_pvdbow_traced`].
pub fn train_pvdbow(
    fragment_count: usize,
    decompositions: &[FragmentDecomposition],
    config: &EmbedConfig,
) -> Result<EmbeddingTable> {
    train_pvdbow_traced(fragment_count, decompositions, config).map(|(t, _)| t)
}

/// Trains PV-DBOW and also returns the mean per-pair loss of every epoch.
///
/// Graph ids are taken from `decompositions[i].graph_id`; the table holds a
/// graph vector for every id up to the largest one. Fragment ids must be
/// below `fragment_count`.
pub fn train_pvdbow_traced(
    fragment_count: usize,
    decompositions: &[FragmentDecomposition],
    config: &EmbedConfig,
) -> Result<(EmbeddingTable, Vec<f64>)> {
    config.validate()?;
    let pairs: usize = decompositions.iter().map(FragmentDecomposition::len).sum();
    if pairs == 0 {
        return Err(Error::Training("every decomposition is empty".into()));
    }
    let mut frequency = vec![0usize; fragment_count];
    for d in decompositions {
        for &f in &d.fragment_ids {
            *frequency
                .get_mut(f)
                .ok_or(Error::UnknownFragment(f))? += 1;
        }
    }
    let graph_count = decompositions.iter().map(|d| d.graph_id + 1).max().unwrap_or(0);
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut graphs = init_vectors(graph_count, dim, &mut rng);
    let mut fragments = init_vectors(fragment_count, dim, &mut rng);
    let noise = WeightedIndex::new(frequency.iter().map(|&c| (c as f64).powf(0.75)))
        .map_err(|e| Error::Training(format!("negative-sampling table: {e}")))?;

    let total_steps = (config.epochs * pairs) as f64;
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..decompositions.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut negs: Vec<usize> = Vec::with_capacity(config.negatives);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &di in &order {
            let doc = &decompositions[di];
            let gid = doc.graph_id;
            for &target in &doc.fragment_ids {
                let lr = config.lr_start
                    - (config.lr_start - config.lr_end) * step as f64 / total_steps;
                step += 1;
                negs.clear();
                for _ in 0..config.negatives {
                    let n = noise.sample(&mut rng);
                    if n != target {
                        negs.push(n);
                    }
                }
                let g = &graphs[gid];
                let neg_refs: Vec<&[f64]> = negs.iter().map(|&n| fragments[n].as_slice()).collect();
                epoch_loss += triple_loss(g, &fragments[target], &neg_refs);
                let (grad_graph, grad_pos, grad_negs) =
                    triple_gradient(g, &fragments[target], &neg_refs);
                for (fv, d) in fragments[target].iter_mut().zip(&grad_pos) {
                    *fv -= lr * d;
                }
                for (&n, grad) in negs.iter().zip(&grad_negs) {
                    for (nv, d) in fragments[n].iter_mut().zip(grad) {
                        *nv -= lr * d;
                    }
                }
                for (gv, d) in graphs[gid].iter_mut().zip(&grad_graph) {
                    *gv -= lr * d;
                }
            }
        }
        epoch_losses.push(epoch_loss / pairs as f64);
    }

    if graphs.iter().chain(&fragments).flatten().any(|v| !v.is_finite()) {
        return Err(Error::Training("training diverged to non-finite values".into()));
    }
    Ok((
        EmbeddingTable {
            dim,
            fragment_vectors: fragments,
            graph_vectors: graphs,
        },
        epoch_losses,
    ))
}

/// Looks up the point cloud of one decomposition. An empty decomposition
/// falls back to the single point given by the graph's own vector.
pub fn embed_decomposition(
    decomposition: &FragmentDecomposition,
    table: &EmbeddingTable,
) -> Result<VectorSet> {
    let points = if decomposition.is_empty() {
        let g = table
            .graph_vectors
            .get(decomposition.graph_id)
            .ok_or_else(|| {
                Error::Training(format!(
                    "no graph vector for graph {}",
                    decomposition.graph_id
                ))
            })?;
        vec![g.clone()]
    } else {
        decomposition
            .fragment_ids
            .iter()
            .map(|&f| {
                table
                    .fragment_vectors
                    .get(f)
                    .cloned()
                    .ok_or(Error::UnknownFragment(f))
            })
            .collect::<Result<_>>()?
    };
    Ok(VectorSet {
        graph_id: decomposition.graph_id,
        points,
    })
}
