//! kNN, multinomial logistic regression and RBF-kernel SVM over dense
//! feature rows.

mod blob;
mod knn;
mod logreg;
mod svm;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use blob::{decode_model, encode_model, read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use knn::knn_predict;
pub use logreg::{logreg_loss, logreg_loss_and_gradient, logreg_optimize, LogregConfig, LogregParams};
pub use svm::{rbf, rbf_gram, scale_gamma, smo, svm_dual_objective, BinarySolution};

use crate::error::{Error, Result};
use crate::par::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    Logreg,
    SvmRbf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Knn, ClassifierKind::Logreg, ClassifierKind::SvmRbf];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::SvmRbf => "svm_rbf",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(ClassifierKind::Knn),
            "logreg" => Ok(ClassifierKind::Logreg),
            "svm" | "svm_rbf" | "svm-rbf" => Ok(ClassifierKind::SvmRbf),
            _ => Err(Error::Config(format!("unknown classifier '{s}' (knn, logreg, svm_rbf)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    Scale,
    Fixed(f64),
}

impl FromStr for GammaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "scale" {
            return Ok(GammaMode::Scale);
        }
        match s.parse::<f64>() {
            Ok(g) if g > 0.0 && g.is_finite() => Ok(GammaMode::Fixed(g)),
            _ => Err(Error::Config(format!("gamma must be 'scale' or a positive number, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub k: usize,
    pub c_grid: Vec<f64>,
    pub gamma: GammaMode,
    pub logreg: LogregConfig,
    pub svm_tol: f64,
    pub svm_max_iters: usize,
    /// Seed of the internal C-selection folds.
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Knn,
            k: 3,
            c_grid: vec![1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6],
            gamma: GammaMode::Scale,
            logreg: LogregConfig::default(),
            svm_tol: 1e-3,
            svm_max_iters: 1_000_000,
            seed: 0,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::Config("C grid must be nonempty and positive".into()));
        }
        if self.c_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("C grid must be strictly ascending".into()));
        }
        if !(self.logreg.l2 >= 0.0) || !(self.logreg.tol > 0.0) {
            return Err(Error::Config("logreg needs l2 >= 0 and tol > 0".into()));
        }
        Ok(())
    }
}

/// One binary RBF machine restricted to its support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfMachine {
    pub support: Vec<Vec<f64>>,
    /// `αᵢ yᵢ` per support vector
    pub coef: Vec<f64>,
    pub rho: f64,
}

impl RbfMachine {
    pub fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(s, c)| c * rbf(s, x, gamma))
            .sum::<f64>()
            - self.rho
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Constant(usize),
    Knn {
        k: usize,
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
    },
    Logreg {
        mean: Vec<f64>,
        scale: Vec<f64>,
        params: LogregParams,
    },
    /// One machine for two classes (positive = class 1), else one per class.
    Svm {
        gamma: f64,
        c: f64,
        machines: Vec<RbfMachine>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub kind: ClassifierKind,
    pub class_count: usize,
    pub dim: usize,
    pub model: Model,
}

fn check_rows(x: &[Vec<f64>], dim: usize) -> Result<()> {
    for row in x {
        if row.len() != dim {
            return Err(Error::DimensionMismatch(row.len(), dim));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Classifier("features must be finite".into()));
        }
    }
    Ok(())
}

fn check_training(x: &[Vec<f64>], y: &[usize], class_count: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Classifier("empty training set".into()));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= class_count) {
        return Err(Error::Classifier(format!("label {bad} outside 0..{class_count}")));
    }
    let dim = x[0].len();
    check_rows(x, dim)?;
    Ok(dim)
}

fn distinct_classes(y: &[usize]) -> Vec<usize> {
    let mut c = y.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

pub fn knn_fit(x: &[Vec<f64>], y: &[usize], class_count: usize, config: &ClassifierConfig) -> Result<TrainedClassifier> {
    let dim = check_training(x, y, class_count)?;
    Ok(TrainedClassifier {
        kind: ClassifierKind::Knn,
        class_count,
        dim,
        model: Model::Knn {
            k: config.k.min(x.len()),
            points: x.to_vec(),
            labels: y.to_vec(),
        },
    })
}

/// Fits a multinomial model on z-scored features (training mean and
/// standard deviation; constant columns are only centred).
pub fn logreg_fit(x: &[Vec<f64>], y: &[usize], class_count: usize, config: &ClassifierConfig) -> Result<TrainedClassifier> {
    let dim = check_training(x, y, class_count)?;
    if distinct_classes(y).len() < 2 {
        return Err(Error::Classifier("logistic regression needs at least two classes".into()));
    }
    let n = x.len() as f64;
    let mean: Vec<f64> = (0..dim).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let scale: Vec<f64> = (0..dim)
        .map(|j| {
            let sd = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardize(r, &mean, &scale)).collect();
    let (params, _) = logreg_optimize(&z, y, class_count, &config.logreg)?;
    Ok(TrainedClassifier {
        kind: ClassifierKind::Logreg,
        class_count,
        dim,
        model: Model::Logreg { mean, scale, params },
    })
}

fn standardize(row: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    row.iter().zip(mean).zip(scale).map(|((v, m), s)| (v - m) / s).collect()
}

fn train_machine(
    kernel: &crate::ot::Matrix,
    rows: &[usize],
    x: &[Vec<f64>],
    positive: &[bool],
    c: f64,
    config: &ClassifierConfig,
) -> Result<RbfMachine> {
    let sub = crate::ot::Matrix::from_vec(
        rows.len(),
        rows.len(),
        rows.iter()
            .flat_map(|&i| rows.iter().map(move |&j| kernel[(i, j)]))
            .collect(),
    );
    let y: Vec<f64> = rows.iter().map(|&i| if positive[i] { 1.0 } else { -1.0 }).collect();
    let sol = smo(&sub, &y, c, config.svm_tol, config.svm_max_iters)?;
    if !sol.converged {
        log::warn!("SMO stopped at its iteration cap (C={c})");
    }
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support.push(x[rows[t]].clone());
            coef.push(a * y[t]);
        }
    }
    Ok(RbfMachine {
        support,
        coef,
        rho: sol.rho,
    })
}

/// Trains the SVM machines for one C on the rows `rows` of `x`.
fn svm_train_rows(
    kernel: &crate::ot::Matrix,
    rows: &[usize],
    x: &[Vec<f64>],
    y: &[usize],
    class_count: usize,
    c: f64,
    config: &ClassifierConfig,
) -> Result<Model> {
    let present = distinct_classes(&rows.iter().map(|&i| y[i]).collect::<Vec<_>>());
    if present.len() < 2 {
        log::warn!("single-class training set; predicting class {} everywhere", present[0]);
        return Ok(Model::Constant(present[0]));
    }
    let targets: Vec<usize> = if class_count == 2 { vec![1] } else { (0..class_count).collect() };
    let machines = targets
        .par_iter()
        .map(|&t| {
            let positive: Vec<bool> = y.iter().map(|&c| c == t).collect();
            train_machine(kernel, rows, x, &positive, c, config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Model::Svm { gamma: 0.0, c, machines })
}

fn svm_scores(machines: &[RbfMachine], gamma: f64, row: &[f64]) -> Vec<f64> {
    machines.iter().map(|m| m.decision(row, gamma)).collect()
}

fn argmax_low(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

fn predict_svm(machines: &[RbfMachine], gamma: f64, class_count: usize, row: &[f64]) -> usize {
    let scores = svm_scores(machines, gamma, row);
    if class_count == 2 {
        usize::from(scores[0] > 0.0)
    } else {
        argmax_low(&scores)
    }
}

/// Stratified round-robin split of `0..y.len()` into `folds` parts.
fn internal_folds(y: &[usize], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = y.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for c in 0..classes {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            out[next % folds].push(i);
            next += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// Mean 3-fold accuracy of every C in the grid; the best C (smallest on ties)
/// is returned with the scores.
pub fn select_c(
    x: &[Vec<f64>],
    y: &[usize],
    class_count: usize,
    gamma: f64,
    config: &ClassifierConfig,
) -> Result<(f64, Vec<f64>)> {
    if config.c_grid.len() == 1 || x.len() < 3 {
        let c = *config
            .c_grid
            .iter()
            .min_by(|a, b| a.ln().abs().total_cmp(&b.ln().abs()))
            .unwrap();
        return Ok((c, Vec::new()));
    }
    let kernel = rbf_gram(x, gamma);
    let folds = internal_folds(y, 3, config.seed);
    let cells: Vec<(usize, usize)> = (0..config.c_grid.len())
        .flat_map(|ci| (0..folds.len()).map(move |f| (ci, f)))
        .collect();
    let correct = cells
        .par_iter()
        .map(|&(ci, f)| {
            let test = &folds[f];
            let train: Vec<usize> = (0..x.len()).filter(|i| test.binary_search(i).is_err()).collect();
            let model = svm_train_rows(&kernel, &train, x, y, class_count, config.c_grid[ci], config)?;
            Ok(test
                .iter()
                .filter(|&&i| {
                    let p = match &model {
                        Model::Constant(c) => *c,
                        Model::Svm { machines, .. } => predict_svm(machines, gamma, class_count, &x[i]),
                        _ => unreachable!(),
                    };
                    p == y[i]
                })
                .count())
        })
        .collect::<Result<Vec<usize>>>()?;
    let scores: Vec<f64> = (0..config.c_grid.len())
        .map(|ci| {
            let hits: usize = correct[ci * folds.len()..(ci + 1) * folds.len()].iter().sum();
            hits as f64 / x.len() as f64
        })
        .collect();
    let best = argmax_low(&scores);
    Ok((config.c_grid[best], scores))
}

pub fn svm_fit(x: &[Vec<f64>], y: &[usize], class_count: usize, config: &ClassifierConfig) -> Result<TrainedClassifier> {
    let dim = check_training(x, y, class_count)?;
    let gamma = match config.gamma {
        GammaMode::Scale => scale_gamma(x),
        GammaMode::Fixed(g) => g,
    };
    let (c, _) = select_c(x, y, class_count, gamma, config)?;
    let rows: Vec<usize> = (0..x.len()).collect();
    let kernel = rbf_gram(x, gamma);
    let model = match svm_train_rows(&kernel, &rows, x, y, class_count, c, config)? {
        Model::Svm { machines, c, .. } => Model::Svm { gamma, c, machines },
        other => other,
    };
    Ok(TrainedClassifier {
        kind: ClassifierKind::SvmRbf,
        class_count,
        dim,
        model,
    })
}

pub fn fit(x: &[Vec<f64>], y: &[usize], class_count: usize, config: &ClassifierConfig) -> Result<TrainedClassifier> {
    config.validate()?;
    match config.kind {
        ClassifierKind::Knn => knn_fit(x, y, class_count, config),
        ClassifierKind::Logreg => logreg_fit(x, y, class_count, config),
        ClassifierKind::SvmRbf => svm_fit(x, y, class_count, config),
    }
}

impl TrainedClassifier {
    pub fn predict_one(&self, row: &[f64]) -> Result<usize> {
        check_rows(std::slice::from_ref(&row.to_vec()), self.dim)?;
        Ok(match &self.model {
            Model::Constant(c) => *c,
            Model::Knn { k, points, labels } => knn_predict(points, labels, row, *k)?,
            Model::Logreg { mean, scale, params } => argmax_low(&params.scores(&standardize(row, mean, scale))),
            Model::Svm { gamma, machines, .. } => predict_svm(machines, *gamma, self.class_count, row),
        })
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.iter().map(|r| self.predict_one(r)).collect()
    }
}

/// Fraction of positions where `predictions` and `labels` agree.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    if labels.is_empty() {
        return Err(Error::Classifier("accuracy of an empty prediction set".into()));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}
