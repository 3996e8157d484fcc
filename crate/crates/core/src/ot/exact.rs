//! Exact optimal transport for small instances, used as a reference.

use super::{DiscreteDistribution, Matrix};
use crate::error::{Error, Result};

const MAX_SIDE: usize = 8;
const MASS_EPS: f64 = 1e-14;

/// Exact minimal transport cost `min_π ⟨π, cost⟩` for at most 8×8 problems.
///
/// Equal-size uniform problems are solved by enumerating assignments (an
/// optimal plan sits on a permutation matrix); everything else by successive
/// shortest augmenting paths on the transportation network.
pub fn exact_ot_small(cost: &Matrix, mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Result<f64> {
    let (m, n) = (cost.rows(), cost.cols());
    if m > MAX_SIDE || n > MAX_SIDE {
        return Err(Error::TooLarge { rows: m, cols: n });
    }
    if mu.len() != m || nu.len() != n {
        return Err(Error::DimensionMismatch(mu.len() * n, m * nu.len()));
    }
    if m == n && mu.is_uniform() && nu.is_uniform() {
        Ok(assignment_enumeration(cost))
    } else {
        min_cost_flow(cost, mu.weights(), nu.weights())
    }
}

/// Minimum over all permutations σ of `mean_i cost[i, σ(i)]` (Heap's algorithm).
pub fn assignment_enumeration(cost: &Matrix) -> f64 {
    let n = cost.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let eval = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum::<f64>();
    let mut best = eval(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(eval(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best / n as f64
}

/// Successive shortest paths with Bellman–Ford on the residual network.
fn min_cost_flow(cost: &Matrix, mu: &[f64], nu: &[f64]) -> Result<f64> {
    let (m, n) = (cost.rows(), cost.cols());
    let scale = cost.as_slice().iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * scale;
    let mut supply = mu.to_vec();
    let mut demand = nu.to_vec();
    let mut flow = Matrix::zeros(m, n);
    // Nodes: sources 0..m, sinks m..m+n.
    loop {
        if supply.iter().all(|&s| s <= MASS_EPS) || demand.iter().all(|&d| d <= MASS_EPS) {
            break;
        }
        let total = m + n;
        let mut dist = vec![f64::INFINITY; total];
        let mut pred = vec![usize::MAX; total];
        for i in 0..m {
            if supply[i] > MASS_EPS {
                dist[i] = 0.0;
            }
        }
        // Residual arcs: source i -> sink j (cost c_ij, unbounded),
        // sink j -> source i (cost -c_ij, capacity flow_ij).
        for _ in 0..total {
            let mut changed = false;
            for i in 0..m {
                if dist[i].is_finite() {
                    for j in 0..n {
                        let cand = dist[i] + cost[(i, j)];
                        if cand < dist[m + j] - tol {
                            dist[m + j] = cand;
                            pred[m + j] = i;
                            changed = true;
                        }
                    }
                }
            }
            for j in 0..n {
                if dist[m + j].is_finite() {
                    for i in 0..m {
                        if flow[(i, j)] > MASS_EPS {
                            let cand = dist[m + j] - cost[(i, j)];
                            if cand < dist[i] - tol {
                                dist[i] = cand;
                                pred[i] = m + j;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let Some(sink) = (0..n)
            .filter(|&j| demand[j] > MASS_EPS && dist[m + j].is_finite())
            .min_by(|&a, &b| dist[m + a].total_cmp(&dist[m + b]))
        else {
            break;
        };
        // Walk back to the originating source and find the bottleneck.
        let mut amount = demand[sink];
        let mut node = m + sink;
        let mut path = Vec::new();
        while pred[node] != usize::MAX {
            let prev = pred[node];
            path.push((prev, node));
            if path.len() > total {
                return Err(Error::Numerical("transport network has a negative residual cycle".into()));
            }
            if prev >= m {
                // backward arc sink(prev) -> source(node)
                amount = amount.min(flow[(node, prev - m)]);
            }
            node = prev;
        }
        amount = amount.min(supply[node]);
        for &(from, to) in &path {
            if from < m {
                flow[(from, to - m)] += amount;
            } else {
                flow[(to, from - m)] -= amount;
            }
        }
        supply[node] -= amount;
        demand[sink] -= amount;
    }
    Ok(flow.as_slice().iter().zip(cost.as_slice()).map(|(f, c)| f * c).sum())
}
