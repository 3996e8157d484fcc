use serde::{Deserialize, Serialize};

use super::{DiscreteDistribution, Matrix};
use crate::error::{Error, Result};

/// Entropic OT solver settings. The Gibbs kernel is `exp(-cost / lambda)`,
/// so a smaller `lambda` is closer to unregularized transport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornConfig {
    pub lambda: f64,
    /// Maximum number of scaling sweeps (each updates both sides once).
    pub max_iters: usize,
    pub marginal_tol: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            lambda: 1e-2,
            max_iters: 30,
            marginal_tol: 1e-9,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.max_iters < 1 {
            return Err(Error::Config("Sinkhorn needs at least one iteration".into()));
        }
        if !(self.marginal_tol > 0.0) {
            return Err(Error::Config("marginal tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// A coupling returned by [`sinkhorn`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub matrix: Matrix,
    /// `Σ plan ⊙ cost`
    pub transport_cost: f64,
    /// `|rowsum − μ|₁ + |colsum − ν|₁` of the returned plan.
    pub marginal_error: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the log-domain solver produced the plan.
    pub log_domain: bool,
}

const SCALING_LIMIT: f64 = 1e30;

fn marginal_error(plan: &Matrix, mu: &[f64], nu: &[f64]) -> f64 {
    let rows: f64 = plan.row_sums().iter().zip(mu).map(|(a, b)| (a - b).abs()).sum();
    let cols: f64 = plan.col_sums().iter().zip(nu).map(|(a, b)| (a - b).abs()).sum();
    rows + cols
}

fn finish(plan: Matrix, cost: &Matrix, mu: &[f64], nu: &[f64], iterations: usize, tol: f64, log_domain: bool) -> Result<TransportPlan> {
    if plan.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "Sinkhorn plan has non-finite entries ({}x{}, log_domain={log_domain})",
            plan.rows(),
            plan.cols()
        )));
    }
    let mass: f64 = plan.as_slice().iter().sum();
    if mass <= 0.0 {
        return Err(Error::Numerical(format!(
            "Gibbs kernel underflowed completely ({}x{}, max cost {:e})",
            plan.rows(),
            plan.cols(),
            cost.as_slice().iter().cloned().fold(f64::MIN, f64::max)
        )));
    }
    let transport_cost = plan
        .as_slice()
        .iter()
        .zip(cost.as_slice())
        .map(|(p, c)| p * c)
        .sum();
    let err = marginal_error(&plan, mu, nu);
    Ok(TransportPlan {
        matrix: plan,
        transport_cost,
        marginal_error: err,
        iterations,
        converged: err < tol,
        log_domain,
    })
}

/// Entropic-regularized optimal transport by alternating matrix scaling.
///
/// Runs at most `max_iters` sweeps and stops early once the plan's marginal
/// L1 error drops below `marginal_tol`. Starts in the plain domain and
/// restarts with log-domain potentials when the kernel underflows or a
/// scaling factor exceeds 1e30. Hitting the iteration cap is not an error:
/// the plan is returned with `converged == false`.
pub fn sinkhorn(
    cost: &Matrix,
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    config: &SinkhornConfig,
) -> Result<TransportPlan> {
    config.validate()?;
    let (m, n) = (cost.rows(), cost.cols());
    if mu.len() != m || nu.len() != n {
        return Err(Error::DimensionMismatch(mu.len() * n, m * nu.len()));
    }
    if cost.as_slice().iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("cost matrix has non-finite entries".into()));
    }
    match scaling_domain(cost, mu.weights(), nu.weights(), config) {
        Some(plan) => Ok(plan),
        None => log_domain(cost, mu.weights(), nu.weights(), config),
    }
}

/// Plain-domain iterations; `None` asks the caller to fall back to the log
/// domain.
fn scaling_domain(cost: &Matrix, mu: &[f64], nu: &[f64], config: &SinkhornConfig) -> Option<TransportPlan> {
    let (m, n) = (cost.rows(), cost.cols());
    let mut kernel = cost.clone();
    for v in kernel.as_mut_slice() {
        *v = (-*v / config.lambda).exp();
    }
    let kt = kernel.transpose();
    if kernel.row_sums().iter().any(|&s| s <= f64::MIN_POSITIVE)
        || kt.row_sums().iter().any(|&s| s <= f64::MIN_POSITIVE)
    {
        return None;
    }
    let mut u = vec![1.0; m];
    let mut v = vec![1.0; n];
    let mut kv = vec![0.0; m];
    let mut ktu = vec![0.0; n];
    let mut iterations = 0;
    for it in 1..=config.max_iters {
        iterations = it;
        for i in 0..m {
            kv[i] = kernel.row(i).iter().zip(&v).map(|(k, x)| k * x).sum();
            u[i] = mu[i] / kv[i];
        }
        for j in 0..n {
            ktu[j] = kt.row(j).iter().zip(&u).map(|(k, x)| k * x).sum();
            v[j] = nu[j] / ktu[j];
        }
        if u.iter().chain(&v).any(|x| !x.is_finite() || *x > SCALING_LIMIT) {
            return None;
        }
        // Columns match ν exactly after the v update; only rows can be off.
        let row_err: f64 = (0..m)
            .map(|i| {
                let s: f64 = kernel.row(i).iter().zip(&v).map(|(k, x)| k * x).sum();
                (u[i] * s - mu[i]).abs()
            })
            .sum();
        if row_err < config.marginal_tol {
            break;
        }
    }
    let mut plan = kernel;
    for i in 0..m {
        for j in 0..n {
            plan[(i, j)] *= u[i] * v[j];
        }
    }
    finish(plan, cost, mu, nu, iterations, config.marginal_tol, false).ok()
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn log_domain(cost: &Matrix, mu: &[f64], nu: &[f64], config: &SinkhornConfig) -> Result<TransportPlan> {
    let (m, n) = (cost.rows(), cost.cols());
    let lambda = config.lambda;
    let log_mu: Vec<f64> = mu.iter().map(|w| w.ln()).collect();
    let log_nu: Vec<f64> = nu.iter().map(|w| w.ln()).collect();
    // f = λ ln u, g = λ ln v
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    let row_lse = |f: &[f64], g: &[f64], i: usize| {
        log_sum_exp((0..n).map(move |j| (f[i] + g[j] - cost[(i, j)]) / lambda))
    };
    for it in 1..=config.max_iters {
        iterations = it;
        for i in 0..m {
            let lse = log_sum_exp((0..n).map(|j| (g[j] - cost[(i, j)]) / lambda));
            f[i] = lambda * (log_mu[i] - lse);
        }
        for j in 0..n {
            let lse = log_sum_exp((0..m).map(|i| (f[i] - cost[(i, j)]) / lambda));
            g[j] = lambda * (log_nu[j] - lse);
        }
        let row_err: f64 = (0..m)
            .map(|i| (row_lse(&f, &g, i).exp() - mu[i]).abs())
            .sum();
        if row_err < config.marginal_tol {
            break;
        }
    }
    let mut plan = Matrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            plan[(i, j)] = ((f[i] + g[j] - cost[(i, j)]) / lambda).exp();
        }
    }
    finish(plan, cost, mu, nu, iterations, config.marginal_tol, true)
}
