use crate::error::{Error, Result};
use crate::ot::Matrix;

const TAU: f64 = 1e-12;

/// `exp(-gamma · ‖a − b‖²)`
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

pub fn rbf_gram(x: &[Vec<f64>], gamma: f64) -> Matrix {
    let n = x.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let v = rbf(&x[i], &x[j], gamma);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// `1 / (dim · var)` over every feature value; 1 when the variance vanishes.
pub fn scale_gamma(x: &[Vec<f64>]) -> f64 {
    let values: Vec<f64> = x.iter().flatten().copied().collect();
    let dim = x.first().map_or(1, Vec::len).max(1);
    if values.is_empty() {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0
    }
}

/// Dual objective `Σα − ½ Σᵢⱼ αᵢαⱼ yᵢyⱼ Kᵢⱼ` (to be maximized).
pub fn svm_dual_objective(alpha: &[f64], y: &[f64], kernel: &Matrix) -> f64 {
    let mut quad = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[(i, j)];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Solution of one binary soft-margin problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ αᵢ yᵢ K(xᵢ, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO with maximal-violating-pair selection on a precomputed kernel.
/// Labels are `±1`. Stops when the KKT violation gap is below `tol`.
pub fn smo(kernel: &Matrix, y: &[f64], c: f64, tol: f64, max_iters: usize) -> Result<BinarySolution> {
    let n = y.len();
    if kernel.rows() != n || kernel.cols() != n {
        return Err(Error::DimensionMismatch(kernel.rows(), n));
    }
    if !(c > 0.0) {
        return Err(Error::Config(format!("C must be positive, got {c}")));
    }
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[(i, j)];
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    let mut free_sum = 0.0;
    let mut free = 0usize;
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free += 1;
            free_sum += yg;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else {
        lb.max(0.0)
    };
    Ok(BinarySolution {
        alpha,
        rho,
        iterations,
        converged,
    })
}
