use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogregConfig {
    /// L2 penalty on the weights (not the biases).
    pub l2: f64,
    pub max_iters: usize,
    /// Stop once the gradient norm falls to this value.
    pub tol: f64,
}

impl Default for LogregConfig {
    fn default() -> Self {
        LogregConfig {
            l2: 1e-2,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

/// Parameters of a multinomial model: `K×d` weights row-major, then `K` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LogregParams {
    pub classes: usize,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl LogregParams {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        LogregParams {
            classes,
            dim,
            values: vec![0.0; classes * (dim + 1)],
        }
    }

    pub fn weight(&self, c: usize) -> &[f64] {
        &self.values[c * self.dim..(c + 1) * self.dim]
    }

    pub fn bias(&self, c: usize) -> f64 {
        self.values[self.classes * self.dim + c]
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| self.bias(c) + self.weight(c).iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }
}

fn log_softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    scores.iter().map(|s| s - lse).collect()
}

/// Mean cross-entropy plus `l2/2 · ‖W‖²`.
pub fn logreg_loss(params: &LogregParams, x: &[Vec<f64>], y: &[usize], l2: f64) -> f64 {
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &c)| -log_softmax(&params.scores(row))[c])
        .sum::<f64>()
        / x.len() as f64;
    let w = &params.values[..params.classes * params.dim];
    data + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Loss and its gradient with respect to `params.values`.
pub fn logreg_loss_and_gradient(params: &LogregParams, x: &[Vec<f64>], y: &[usize], l2: f64) -> (f64, Vec<f64>) {
    let (k, d) = (params.classes, params.dim);
    let n = x.len() as f64;
    let mut grad = vec![0.0; params.values.len()];
    let mut data = 0.0;
    for (row, &c) in x.iter().zip(y) {
        let lp = log_softmax(&params.scores(row));
        data -= lp[c];
        for (j, l) in lp.iter().enumerate() {
            let r = (l.exp() - if j == c { 1.0 } else { 0.0 }) / n;
            for (g, v) in grad[j * d..(j + 1) * d].iter_mut().zip(row) {
                *g += r * v;
            }
            grad[k * d + j] += r;
        }
    }
    let w = &params.values[..k * d];
    for (g, v) in grad[..k * d].iter_mut().zip(w) {
        *g += l2 * v;
    }
    let loss = data / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad)
}

/// Full-batch gradient descent with Armijo backtracking. Returns the
/// parameters and the loss after every accepted step.
pub fn logreg_optimize(
    x: &[Vec<f64>],
    y: &[usize],
    classes: usize,
    config: &LogregConfig,
) -> Result<(LogregParams, Vec<f64>)> {
    let dim = x.first().map_or(0, Vec::len);
    let mut params = LogregParams::zeros(classes, dim);
    let (mut loss, mut grad) = logreg_loss_and_gradient(&params, x, y, config.l2);
    let mut trace = vec![loss];
    let mut step = 1.0;
    for _ in 0..config.max_iters {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() <= config.tol {
            break;
        }
        step *= 2.0;
        let accepted = loop {
            let trial = LogregParams {
                values: params.values.iter().zip(&grad).map(|(p, g)| p - step * g).collect(),
                ..params.clone()
            };
            let trial_loss = logreg_loss(&trial, x, y, config.l2);
            if trial_loss <= loss - 0.5 * step * gnorm2 {
                break Some(trial);
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some(next) = accepted else { break };
        params = next;
        (loss, grad) = logreg_loss_and_gradient(&params, x, y, config.l2);
        if !loss.is_finite() {
            return Err(Error::Numerical("logistic regression loss diverged".into()));
        }
        trace.push(loss);
    }
    Ok((params, trace))
}
