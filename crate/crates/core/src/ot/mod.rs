//! Optimal-transport distances between point clouds.

mod exact;
mod matrix;
mod matrix_io;
mod sinkhorn;

use std::cmp::Ordering;

pub use exact::{assignment_enumeration, exact_ot_small};
pub use matrix::Matrix;
pub use matrix_io::{decode_matrix, encode_matrix, read_distance_matrix, write_distance_matrix, MATRIX_MAGIC};
pub use sinkhorn::{sinkhorn, SinkhornConfig, TransportPlan};

use crate::embed::VectorSet;
use crate::error::{Error, Result};

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("a distribution needs at least one atom".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("distribution weights must be finite and nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("distribution weights sum to {sum}, not 1")));
        }
        Ok(DiscreteDistribution { weights })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution over zero atoms");
        DiscreteDistribution {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.weights.len() as f64;
        self.weights.iter().all(|&x| (x - w).abs() <= 1e-15)
    }
}

/// Squared Euclidean distances between every point of `a` and every point of `b`.
pub fn cost_matrix(a: &VectorSet, b: &VectorSet) -> Result<Matrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let mut out = Matrix::zeros(a.len(), b.len());
    for (i, p) in a.points.iter().enumerate() {
        for (j, q) in b.points.iter().enumerate() {
            out[(i, j)] = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
        }
    }
    Ok(out)
}

/// Result of one graph-to-graph Wasserstein-2 evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphDistance {
    pub value: f64,
    pub converged: bool,
}

fn cloud_order(a: &VectorSet, b: &VectorSet) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.points
            .iter()
            .flatten()
            .zip(b.points.iter().flatten())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Wasserstein-2 distance between two point clouds with uniform weights,
/// `sqrt(max(⟨π, cost⟩, 0))` with π from [`sinkhorn`].
///
/// The pair is put in a fixed orientation before solving, so swapping the
/// arguments returns the identical value.
pub fn graph_distance_detailed(a: &VectorSet, b: &VectorSet, config: &SinkhornConfig) -> Result<GraphDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Config("point clouds must be nonempty".into()));
    }
    let (a, b) = if cloud_order(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let cost = cost_matrix(a, b)?;
    let plan = sinkhorn(
        &cost,
        &DiscreteDistribution::uniform(a.len()),
        &DiscreteDistribution::uniform(b.len()),
        config,
    )?;
    Ok(GraphDistance {
        value: plan.transport_cost.max(0.0).sqrt(),
        converged: plan.converged,
    })
}

pub fn graph_distance(a: &VectorSet, b: &VectorSet, config: &SinkhornConfig) -> Result<f64> {
    graph_distance_detailed(a, b, config).map(|d| d.value)
}

/// Exact 1-D Wasserstein-2 distance between two uniformly weighted samples.
///
/// Both quantile functions are step functions with breakpoints at `k/n` and
/// `l/m`; the squared difference is integrated piece by piece over the merged
/// breakpoints (compared in integer arithmetic) and the root taken.
pub fn wasserstein2_1d(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "1-D W2 needs nonempty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as u128, b.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    // positions measured in units of 1/(n·m)
    let mut pos: u128 = 0;
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        let next_a = (i as u128 + 1) * m;
        let next_b = (j as u128 + 1) * n;
        let next = next_a.min(next_b);
        let width = (next - pos) as f64 / (n * m) as f64;
        let d = a[i] - b[j];
        acc += width * d * d;
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    acc.sqrt()
}
