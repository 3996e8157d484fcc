//! Metric-distribution embedding: every graph becomes the normalized vector of
//! its distances to a class-ordered support set.

mod cache;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

pub use cache::{CacheKey, DistanceCache};

use crate::embed::VectorSet;
use crate::error::{Error, Result};
use crate::ot::{graph_distance_detailed, SinkhornConfig};

/// Training graphs grouped into contiguous class blocks, classes ascending,
/// ids ascending inside a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    pub ordered_ids: Vec<usize>,
    pub class_offsets: Vec<usize>,
    pub per_class_counts: Vec<usize>,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.ordered_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered_ids.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.ordered_ids.contains(&id)
    }
}

/// Orders `train_ids` into class blocks. Every class in `0..class_count`
/// must be represented.
pub fn build_support_set(train_ids: &[usize], labels: &[usize], class_count: usize) -> Result<SupportSet> {
    let mut ids = train_ids.to_vec();
    if let Some(&bad) = ids.iter().find(|&&i| i >= labels.len()) {
        return Err(Error::Config(format!("support id {bad} has no label")));
    }
    ids.sort_unstable_by_key(|&i| (labels[i], i));
    let before = ids.len();
    ids.dedup();
    if ids.len() != before {
        return Err(Error::Config("support ids must be unique".into()));
    }
    let mut per_class_counts = vec![0usize; class_count];
    for &i in &ids {
        let y = labels[i];
        if y >= class_count {
            return Err(Error::Config(format!("label {y} outside 0..{class_count}")));
        }
        per_class_counts[y] += 1;
    }
    if let Some(missing) = per_class_counts.iter().position(|&c| c == 0) {
        return Err(Error::InfeasibleSplit(format!(
            "support set does not cover class {missing}"
        )));
    }
    let mut class_offsets = Vec::with_capacity(class_count);
    let mut offset = 0;
    for &c in &per_class_counts {
        class_offsets.push(offset);
        offset += c;
    }
    Ok(SupportSet {
        ordered_ids: ids,
        class_offsets,
        per_class_counts,
    })
}

/// One graph's normalized distance profile over the support set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub graph_id: usize,
    pub values: Vec<f64>,
    /// Sum of the raw distances.
    pub normalizer: f64,
    /// Set when every raw distance was zero; `values` is then uniform.
    pub degenerate: bool,
}

impl MetricVector {
    /// Normalizes raw distances by their sum; an all-zero row becomes uniform.
    pub fn from_distances(graph_id: usize, raw: Vec<f64>) -> Self {
        let normalizer: f64 = raw.iter().sum();
        if normalizer > 0.0 {
            MetricVector {
                graph_id,
                values: raw.into_iter().map(|d| d / normalizer).collect(),
                normalizer,
                degenerate: false,
            }
        } else {
            let n = raw.len();
            MetricVector {
                graph_id,
                values: vec![1.0 / n as f64; n],
                normalizer,
                degenerate: true,
            }
        }
    }
}

/// A symmetric distance between graphs addressed by id.
pub trait DistanceFn: Sync {
    fn distance(&self, a: usize, b: usize) -> Result<f64>;
}

impl<F> DistanceFn for F
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    fn distance(&self, a: usize, b: usize) -> Result<f64> {
        self(a, b)
    }
}

/// Wasserstein-2 between the point clouds of two graphs. Counts the pairs
/// where Sinkhorn stopped at its iteration cap.
pub struct CloudDistance<'a> {
    clouds: &'a [VectorSet],
    config: SinkhornConfig,
    not_converged: AtomicUsize,
}

impl<'a> CloudDistance<'a> {
    pub fn new(clouds: &'a [VectorSet], config: SinkhornConfig) -> Self {
        CloudDistance {
            clouds,
            config,
            not_converged: AtomicUsize::new(0),
        }
    }

    pub fn not_converged(&self) -> usize {
        self.not_converged.load(Ordering::Relaxed)
    }
}

impl DistanceFn for CloudDistance<'_> {
    fn distance(&self, a: usize, b: usize) -> Result<f64> {
        let d = graph_distance_detailed(&self.clouds[a], &self.clouds[b], &self.config)?;
        if !d.converged {
            self.not_converged.fetch_add(1, Ordering::Relaxed);
        }
        Ok(d.value)
    }
}

/// Distances from `graph` to every support member, in support order,
/// normalized.
pub fn metric_vector(graph: usize, support: &SupportSet, distance: &dyn DistanceFn) -> Result<MetricVector> {
    let raw = support
        .ordered_ids
        .iter()
        .map(|&s| {
            distance
                .distance(graph, s)
                .map_err(|e| Error::PairDistance(graph, s, Box::new(e)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricVector::from_distances(graph, raw))
}

/// Metric vectors of several graphs against one support set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEmbedding {
    pub support: SupportSet,
    pub rows: Vec<MetricVector>,
}

impl MetricEmbedding {
    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    pub fn degenerate_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.degenerate).count()
    }
}

/// Embeds `graph_ids` against `support`, pulling distances through `cache`.
///
/// Each unordered pair is evaluated at most once per cache lifetime; the
/// number of fresh evaluations is bounded by `graph_ids.len() · Ñ`.
pub fn embed_all(
    graph_ids: &[usize],
    support: &SupportSet,
    distance: &dyn DistanceFn,
    cache: &DistanceCache,
) -> Result<MetricEmbedding> {
    let pairs: Vec<(usize, usize)> = graph_ids
        .iter()
        .flat_map(|&g| support.ordered_ids.iter().map(move |&s| (g, s)))
        .collect();
    cache.ensure(&pairs, distance)?;
    let rows = graph_ids
        .iter()
        .map(|&g| {
            let raw = support
                .ordered_ids
                .iter()
                .map(|&s| cache.get(g, s).expect("ensured above"))
                .collect();
            MetricVector::from_distances(g, raw)
        })
        .collect();
    Ok(MetricEmbedding {
        support: support.clone(),
        rows,
    })
}

/// CSV export: `graph_id,label,v_1,...,v_Ñ`.
pub fn write_embedding_csv(path: impl AsRef<Path>, embedding: &MetricEmbedding, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("graph_id,label");
    for j in 1..=embedding.support.len() {
        write!(out, ",v_{j}").unwrap();
    }
    out.push('\n');
    for row in &embedding.rows {
        write!(out, "{},{}", row.graph_id, labels[row.graph_id]).unwrap();
        for v in &row.values {
            write!(out, ",{v:?}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a CSV written by [`write_embedding_csv`] as `(graph_id, label, values)`.
pub fn read_embedding_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, usize, Vec<f64>)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            file: file.clone(),
            line: i + 1,
            msg: msg.to_string(),
        };
        let mut fields = line.split(',');
        let id = fields.next().and_then(|f| f.parse().ok()).ok_or_else(|| bad("bad graph id"))?;
        let label = fields.next().and_then(|f| f.parse().ok()).ok_or_else(|| bad("bad label"))?;
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<_>>>()?;
        out.push((id, label, values));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_sorted_by_class_then_id() {
        // graph 1,2 class 0; graph 3 class 1
        let labels = vec![0, 0, 0, 1];
        let s = build_support_set(&[3, 1, 2], &labels, 2).unwrap();
        assert_eq!(s.ordered_ids, vec![1, 2, 3]);
        assert_eq!(s.class_offsets, vec![0, 2]);
        assert_eq!(s.per_class_counts, vec![2, 1]);
    }

    #[test]
    fn support_requires_every_class() {
        let labels = vec![0, 0, 1];
        assert!(matches!(
            build_support_set(&[0, 1], &labels, 2),
            Err(Error::InfeasibleSplit(_))
        ));
        assert!(build_support_set(&[0, 0, 2], &labels, 2).is_err());
    }

    #[test]
    fn balanced_support_counts() {
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let ids: Vec<usize> = (0..10).collect();
        let s = build_support_set(&ids, &labels, 2).unwrap();
        assert_eq!(s.per_class_counts, vec![5, 5]);
    }

    #[test]
    fn direct_normalization() {
        let v = MetricVector::from_distances(0, vec![1.0, 1.0, 2.0]);
        assert_eq!(v.values, vec![0.25, 0.25, 0.5]);
        assert_eq!(v.normalizer, 4.0);
        assert!(!v.degenerate);
        let z = MetricVector::from_distances(0, vec![0.0, 0.0]);
        assert!(z.degenerate);
        assert_eq!(z.values, vec![0.5, 0.5]);
    }

    #[test]
    fn distance_failures_name_the_pair() {
        let labels = vec![0, 1];
        let s = build_support_set(&[0, 1], &labels, 2).unwrap();
        let f = |a: usize, b: usize| -> Result<f64> {
            if b == 1 {
                Err(Error::Numerical("boom".into()))
            } else {
                Ok((a + b) as f64)
            }
        };
        match metric_vector(0, &s, &f) {
            Err(Error::PairDistance(0, 1, _)) => {}
            other => panic!("{other:?}"),
        }
    }
}
