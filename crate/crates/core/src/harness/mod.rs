//! Experiment drivers: stratified cross-validation, few-shot sampling-rate
//! sweeps, min-sup sweeps and the metric-distribution drift study.

mod report;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

pub use report::{aggregate, mean_std, Aggregate, CellAggregate, Report, RunRecord, Skipped, StageTiming, SweepRow};

use crate::classify::{self, ClassifierConfig, ClassifierKind, Model};
use crate::dataset::{stratified_kfold, stratified_sample, GraphDataset, SplitConfig};
use crate::embed::{embed_decomposition, train_pvdbow, EmbedConfig, EmbeddingTable, VectorSet};
use crate::error::{Error, Result};
use crate::metric::{build_support_set, embed_all, CacheKey, CloudDistance, DistanceCache, MetricEmbedding};
use crate::mining::{decompose_all, mine_frequent_fragments, FragmentDecomposition, FrequentFragment, MiningConfig};
use crate::ot::{wasserstein2_1d, SinkhornConfig};

/// Which graphs fragments and PV-DBOW vectors are learned from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MineScope {
    /// The whole dataset, once, shared by every split.
    All,
    /// The training part of each split only.
    Train,
}

impl MineScope {
    pub fn name(self) -> &'static str {
        match self {
            MineScope::All => "all",
            MineScope::Train => "train",
        }
    }
}

impl FromStr for MineScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(MineScope::All),
            "train" => Ok(MineScope::Train),
            _ => Err(Error::Config(format!("mine-on must be 'all' or 'train', got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mining: MiningConfig,
    pub embed: EmbedConfig,
    pub sinkhorn: SinkhornConfig,
    pub classifier: ClassifierConfig,
    /// Classifiers evaluated on every split.
    pub classifiers: Vec<ClassifierKind>,
    pub folds: usize,
    pub etas: Vec<f64>,
    pub zeta: f64,
    pub repeats: usize,
    /// Drives splits, PV-DBOW initialization and internal C selection.
    pub seed: u64,
    pub mine_on: MineScope,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mining: MiningConfig::default(),
            embed: EmbedConfig::default(),
            sinkhorn: SinkhornConfig::default(),
            classifier: ClassifierConfig::default(),
            classifiers: vec![ClassifierKind::Knn],
            folds: 10,
            etas: vec![0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.15, 0.20, 0.50, 0.70, 0.90],
            zeta: 0.1,
            repeats: 10,
            seed: 0,
            mine_on: MineScope::All,
            cache_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.mining.validate()?;
        self.embed.validate()?;
        self.sinkhorn.validate()?;
        self.classifier.validate()?;
        if self.classifiers.is_empty() {
            return Err(Error::Config("at least one classifier is required".into()));
        }
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.zeta) {
            return Err(Error::Config(format!("zeta={} must lie in [0, 1)", self.zeta)));
        }
        Ok(())
    }

    fn validate_cv(&self) -> Result<()> {
        self.validate()?;
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        Ok(())
    }

    fn validate_fewshot(&self) -> Result<()> {
        self.validate()?;
        if self.etas.is_empty() {
            return Err(Error::Config("eta list is empty".into()));
        }
        for &eta in &self.etas {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::Config(format!("eta={eta} must lie in (0, 1)")));
            }
            SplitConfig {
                eta,
                zeta: self.zeta,
                seed: 0,
            }
            .validate()?;
        }
        Ok(())
    }

    pub fn embed_config(&self) -> EmbedConfig {
        EmbedConfig {
            seed: self.seed,
            ..self.embed
        }
    }

    fn classifier_config(&self, kind: ClassifierKind) -> ClassifierConfig {
        ClassifierConfig {
            kind,
            seed: self.seed,
            ..self.classifier.clone()
        }
    }

    fn meta(&self, experiment: &str, dataset: &GraphDataset) -> serde_json::Value {
        json!({
            "experiment": experiment,
            "dataset": {
                "name": dataset.name,
                "content_hash": dataset.content_hash(),
                "graphs": dataset.len(),
                "classes": dataset.class_count,
            },
            "mining": self.mining,
            "embed": self.embed_config(),
            "sinkhorn": self.sinkhorn,
            "classifier": {
                "k": self.classifier.k,
                "c_grid": self.classifier.c_grid,
                "gamma": self.classifier.gamma,
                "logreg": self.classifier.logreg,
                "svm_tol": self.classifier.svm_tol,
            },
            "classifiers": self.classifiers,
            "folds": self.folds,
            "etas": self.etas,
            "zeta": self.zeta,
            "repeats": self.repeats,
            "seed": self.seed,
            "mine_on": self.mine_on,
        })
    }

    pub fn cache_key(&self, dataset: &GraphDataset, scope: String) -> CacheKey {
        let embed = self.embed_config();
        CacheKey {
            dataset_hash: dataset.content_hash(),
            min_sup: self.mining.theta,
            max_edges: self.mining.max_edges,
            dim: embed.dim,
            epochs: embed.epochs,
            negatives: embed.negatives,
            lr_start: embed.lr_start,
            lr_end: embed.lr_end,
            lambda: self.sinkhorn.lambda,
            sinkhorn_iters: self.sinkhorn.max_iters,
            marginal_tol: self.sinkhorn.marginal_tol,
            seed: embed.seed,
            scope,
        }
    }
}

/// Fragments, their PV-DBOW vectors and the point cloud of every graph.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub fragments: Vec<FrequentFragment>,
    pub decompositions: Vec<FragmentDecomposition>,
    pub table: EmbeddingTable,
    pub clouds: Vec<VectorSet>,
    pub mining_s: f64,
    pub embedding_s: f64,
}

/// Mines fragments on `train` (or all graphs), decomposes every graph and
/// trains PV-DBOW on the same graphs.
pub fn prepare(dataset: &GraphDataset, mining: &MiningConfig, embed: &EmbedConfig, train: Option<&[usize]>) -> Result<Prepared> {
    let start = Instant::now();
    let fragments = match train {
        Some(ids) => mine_frequent_fragments(&dataset.subset(ids), mining)?,
        None => mine_frequent_fragments(dataset, mining)?,
    };
    let mining_s = start.elapsed().as_secs_f64();
    prepare_with_fragments(dataset, fragments, embed, train, mining_s)
}

pub fn prepare_with_fragments(
    dataset: &GraphDataset,
    fragments: Vec<FrequentFragment>,
    embed: &EmbedConfig,
    train: Option<&[usize]>,
    mining_s: f64,
) -> Result<Prepared> {
    if fragments.is_empty() {
        return Err(Error::Training("no frequent fragments at this min-sup".into()));
    }
    let start = Instant::now();
    let decompositions = decompose_all(dataset, &fragments);
    let learn: Vec<FragmentDecomposition> = match train {
        None => decompositions.clone(),
        Some(ids) => decompositions
            .iter()
            .map(|d| {
                if ids.binary_search(&d.graph_id).is_ok() {
                    d.clone()
                } else {
                    FragmentDecomposition {
                        graph_id: d.graph_id,
                        fragment_ids: Vec::new(),
                    }
                }
            })
            .collect(),
    };
    let table = train_pvdbow(fragments.len(), &learn, embed)?;
    let clouds = decompositions
        .iter()
        .map(|d| embed_decomposition(d, &table))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        fragments,
        decompositions,
        table,
        clouds,
        mining_s,
        embedding_s: start.elapsed().as_secs_f64(),
    })
}

fn open_cache(config: &ExperimentConfig, dataset: &GraphDataset, scope: String) -> (DistanceCache, Option<CacheKey>) {
    match &config.cache_dir {
        Some(dir) => {
            let key = config.cache_key(dataset, scope);
            (DistanceCache::load_or_new(dir, &key, dataset.len()), Some(key))
        }
        None => (DistanceCache::new(dataset.len()), None),
    }
}

fn close_cache(config: &ExperimentConfig, cache: &DistanceCache, key: Option<CacheKey>) {
    if let (Some(dir), Some(key)) = (&config.cache_dir, key) {
        if let Err(e) = cache.save(dir, &key) {
            log::warn!("could not persist distance cache: {e}");
        }
    }
}

/// Context shared by the records of one split.
struct SplitContext {
    experiment: &'static str,
    cell: String,
    theta: f64,
    fold: Option<usize>,
    repeat: Option<usize>,
    eta: Option<f64>,
    seed: u64,
}

impl SplitContext {
    fn record(&self, config: &ExperimentConfig, classifier: &str) -> RunRecord {
        RunRecord {
            experiment: self.experiment.into(),
            cell: self.cell.clone(),
            classifier: classifier.into(),
            theta: self.theta,
            fold: self.fold,
            repeat: self.repeat,
            eta: self.eta,
            seed: self.seed,
            mine_on: config.mine_on.name().into(),
            value: None,
            error: None,
            train_size: 0,
            test_size: 0,
            support_size: 0,
            fragment_count: 0,
            distance_evals: 0,
            sinkhorn_not_converged: 0,
            degenerate_rows: 0,
            chosen_c: None,
            timing: None,
        }
    }

    fn failed(&self, config: &ExperimentConfig, error: &Error) -> Vec<RunRecord> {
        config
            .classifiers
            .iter()
            .map(|k| RunRecord {
                error: Some(error.to_string()),
                ..self.record(config, k.name())
            })
            .collect()
    }
}

/// Metric embedding of `train ∪ test` against the support set built from
/// `train`, checked for leakage.
fn split_embedding(
    dataset: &GraphDataset,
    prepared: &Prepared,
    config: &ExperimentConfig,
    cache: &DistanceCache,
    train: &[usize],
    test: &[usize],
) -> Result<(MetricEmbedding, usize, usize)> {
    let support = build_support_set(train, &dataset.labels, dataset.class_count)?;
    if let Some(&leak) = support.ordered_ids.iter().find(|id| test.binary_search(id).is_ok()) {
        return Err(Error::Config(format!("test graph {leak} is in its own support set")));
    }
    let distance = CloudDistance::new(&prepared.clouds, config.sinkhorn);
    let before = cache.evaluations();
    let ids: Vec<usize> = train.iter().chain(test).copied().collect();
    let embedding = embed_all(&ids, &support, &distance, cache)?;
    Ok((embedding, cache.evaluations() - before, distance.not_converged()))
}

fn evaluate_split(
    dataset: &GraphDataset,
    prepared: &Prepared,
    config: &ExperimentConfig,
    cache: &DistanceCache,
    train: &[usize],
    test: &[usize],
    ctx: &SplitContext,
) -> Vec<RunRecord> {
    let start = Instant::now();
    let (embedding, evals, not_converged) = match split_embedding(dataset, prepared, config, cache, train, test) {
        Ok(v) => v,
        Err(e) => return ctx.failed(config, &e),
    };
    let distances_s = start.elapsed().as_secs_f64();
    let features = embedding.features();
    let (train_x, test_x) = features.split_at(train.len());
    let train_y: Vec<usize> = train.iter().map(|&i| dataset.labels[i]).collect();
    let test_y: Vec<usize> = test.iter().map(|&i| dataset.labels[i]).collect();
    config
        .classifiers
        .iter()
        .map(|&kind| {
            let fit_start = Instant::now();
            let outcome = classify::fit(train_x, &train_y, dataset.class_count, &config.classifier_config(kind))
                .and_then(|model| {
                    let acc = classify::accuracy(&model.predict(test_x)?, &test_y)?;
                    let c = match model.model {
                        Model::Svm { c, .. } => Some(c),
                        _ => None,
                    };
                    Ok((acc, c))
                });
            let mut rec = ctx.record(config, kind.name());
            rec.train_size = train.len();
            rec.test_size = test.len();
            rec.support_size = embedding.support.len();
            rec.fragment_count = prepared.fragments.len();
            rec.distance_evals = evals;
            rec.sinkhorn_not_converged = not_converged;
            rec.degenerate_rows = embedding.degenerate_rows();
            match outcome {
                Ok((acc, c)) => {
                    rec.value = Some(acc);
                    rec.chosen_c = c;
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            rec.timing = Some(StageTiming {
                mining_s: prepared.mining_s,
                embedding_s: prepared.embedding_s,
                distances_s,
                fit_s: fit_start.elapsed().as_secs_f64(),
            });
            rec
        })
        .collect()
}

/// Runs one split with the configured mining scope. `shared` holds the
/// all-graphs preparation and its cache when the scope is `all`.
fn run_split(
    dataset: &GraphDataset,
    config: &ExperimentConfig,
    shared: Option<(&Prepared, &DistanceCache)>,
    train: &[usize],
    test: &[usize],
    scope_tag: String,
    ctx: &SplitContext,
) -> Vec<RunRecord> {
    match shared {
        Some((prepared, cache)) => evaluate_split(dataset, prepared, config, cache, train, test, ctx),
        None => match prepare(dataset, &config.mining, &config.embed_config(), Some(train)) {
            Ok(prepared) => {
                let (cache, key) = open_cache(config, dataset, scope_tag);
                let runs = evaluate_split(dataset, &prepared, config, &cache, train, test, ctx);
                close_cache(config, &cache, key);
                runs
            }
            Err(e) => ctx.failed(config, &e),
        },
    }
}

fn cv_runs(dataset: &GraphDataset, config: &ExperimentConfig, shared: Option<&Prepared>, cell: &str) -> Result<Vec<RunRecord>> {
    let folds = stratified_kfold(dataset, config.folds, config.seed)?;
    let (cache, key) = open_cache(config, dataset, "all".into());
    let mut runs = Vec::new();
    for (f, fold) in folds.iter().enumerate() {
        let ctx = SplitContext {
            experiment: "cv",
            cell: cell.to_string(),
            theta: config.mining.theta,
            fold: Some(f),
            repeat: None,
            eta: None,
            seed: config.seed,
        };
        let tag = format!("train:cv{}:seed{}:fold{f}", config.folds, config.seed);
        runs.extend(run_split(dataset, config, shared.map(|p| (p, &cache)), &fold.train, &fold.test, tag, &ctx));
    }
    if shared.is_some() {
        close_cache(config, &cache, key);
    }
    Ok(runs)
}

/// Stratified `folds`-fold cross-validation; every fold's training part is
/// its support set.
pub fn run_cv(dataset: &GraphDataset, config: &ExperimentConfig) -> Result<Report> {
    config.validate_cv()?;
    if config.folds > dataset.len() {
        return Err(Error::Config(format!("folds={} exceeds {} graphs", config.folds, dataset.len())));
    }
    let runs = match config.mine_on {
        MineScope::All => match prepare(dataset, &config.mining, &config.embed_config(), None) {
            Ok(p) => cv_runs(dataset, config, Some(&p), "cv")?,
            Err(e) => (0..config.folds)
                .flat_map(|f| {
                    SplitContext {
                        experiment: "cv",
                        cell: "cv".into(),
                        theta: config.mining.theta,
                        fold: Some(f),
                        repeat: None,
                        eta: None,
                        seed: config.seed,
                    }
                    .failed(config, &e)
                })
                .collect(),
        },
        MineScope::Train => cv_runs(dataset, config, None, "cv")?,
    };
    Ok(Report::new(config.meta("cv", dataset), runs))
}

/// Seed of repeat `r`.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// For every η and repeat: a stratified training sample of rate η, a
/// disjoint stratified test sample of rate ζ, support = training sample.
pub fn run_fewshot(dataset: &GraphDataset, config: &ExperimentConfig) -> Result<Report> {
    config.validate_fewshot()?;
    let shared = match config.mine_on {
        MineScope::All => Some(prepare(dataset, &config.mining, &config.embed_config(), None)),
        MineScope::Train => None,
    };
    let (cache, key) = open_cache(config, dataset, "all".into());
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for &eta in &config.etas {
        let cell = format!("eta={eta}");
        for r in 0..config.repeats {
            let seed = repeat_seed(config.seed, r);
            let ctx = SplitContext {
                experiment: "fewshot",
                cell: cell.clone(),
                theta: config.mining.theta,
                fold: None,
                repeat: Some(r),
                eta: Some(eta),
                seed,
            };
            let (train, test) = match stratified_sample(dataset, &SplitConfig { eta, zeta: config.zeta, seed }) {
                Ok(split) => split,
                Err(e @ Error::InfeasibleSplit(_)) => {
                    skipped.push(Skipped {
                        cell: cell.clone(),
                        reason: e.to_string(),
                    });
                    break;
                }
                Err(e) => return Err(e),
            };
            if test.is_empty() {
                runs.extend(ctx.failed(config, &Error::InfeasibleSplit("empty test sample".into())));
                continue;
            }
            let tag = format!("train:fewshot:eta{eta}:zeta{}:seed{seed}", config.zeta);
            let batch = match &shared {
                Some(Ok(p)) => run_split(dataset, config, Some((p, &cache)), &train, &test, tag, &ctx),
                Some(Err(e)) => ctx.failed(config, e),
                None => run_split(dataset, config, None, &train, &test, tag, &ctx),
            };
            runs.extend(batch);
        }
    }
    if matches!(shared, Some(Ok(_))) {
        close_cache(config, &cache, key);
    }
    let mut report = Report::new(config.meta("fewshot", dataset), runs);
    report.skipped = skipped;
    Ok(report)
}

/// Cross-validated accuracy at every min-sup in `thetas` (descending), with
/// the number of frequent fragments mined on the whole dataset.
pub fn minsup_sweep(dataset: &GraphDataset, config: &ExperimentConfig, thetas: &[f64]) -> Result<Report> {
    config.validate_cv()?;
    if thetas.is_empty() {
        return Err(Error::Config("theta list is empty".into()));
    }
    if thetas.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) || thetas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Config("thetas must be descending within (0, 1]".into()));
    }
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for &theta in thetas {
        let cfg = ExperimentConfig {
            mining: MiningConfig {
                theta,
                ..config.mining
            },
            ..config.clone()
        };
        let start = Instant::now();
        let fragments = mine_frequent_fragments(dataset, &cfg.mining)?;
        let mining_s = start.elapsed().as_secs_f64();
        let fragment_count = fragments.len();
        let cell = format!("theta={theta}");
        let degenerate = fragment_count == 0;
        if !degenerate {
            let batch = match cfg.mine_on {
                MineScope::All => match prepare_with_fragments(dataset, fragments, &cfg.embed_config(), None, mining_s) {
                    Ok(p) => cv_runs(dataset, &cfg, Some(&p), &cell)?,
                    Err(e) => SplitContext {
                        experiment: "sweep",
                        cell: cell.clone(),
                        theta,
                        fold: None,
                        repeat: None,
                        eta: None,
                        seed: cfg.seed,
                    }
                    .failed(&cfg, &e),
                },
                MineScope::Train => cv_runs(dataset, &cfg, None, &cell)?,
            };
            runs.extend(batch.into_iter().map(|r| RunRecord {
                experiment: "sweep".into(),
                ..r
            }));
        }
        let agg = aggregate(&runs);
        let mean_accuracy = agg
            .cells
            .iter()
            .filter(|c| c.cell == cell && c.runs > 0)
            .map(|c| (c.classifier.clone(), c.mean))
            .collect();
        rows.push(SweepRow {
            theta,
            fragment_count,
            degenerate,
            mean_accuracy,
        });
    }
    let mut meta = config.meta("sweep", dataset);
    meta["thetas"] = json!(thetas);
    let mut report = Report::new(meta, runs);
    report.sweep = rows;
    Ok(report)
}

/// Mean 1-D Wasserstein-2 distance between every graph's metric vector under
/// a `reference_eta` support set and under each smaller `eta`, per repeat.
///
/// Supports drawn with the same seed are nested, so `eta == reference_eta`
/// yields zero drift.
pub fn drift_study(dataset: &GraphDataset, config: &ExperimentConfig, etas: &[f64], reference_eta: f64) -> Result<Report> {
    config.validate()?;
    if etas.is_empty() {
        return Err(Error::Config("eta list is empty".into()));
    }
    if !(reference_eta > 0.0 && reference_eta <= 1.0) || etas.iter().any(|&e| !(e > 0.0 && e <= reference_eta)) {
        return Err(Error::Config(format!(
            "etas must lie in (0, reference] with reference_eta={reference_eta} in (0, 1]"
        )));
    }
    let prepared = prepare(dataset, &config.mining, &config.embed_config(), None)?;
    let (cache, key) = open_cache(config, dataset, "all".into());
    let all: Vec<usize> = (0..dataset.len()).collect();
    let sample = |eta: f64, seed: u64| {
        stratified_sample(dataset, &SplitConfig { eta, zeta: 0.0, seed }).map(|(train, _)| train)
    };
    let embed = |train: &[usize]| -> Result<(MetricEmbedding, usize, usize)> {
        let support = build_support_set(train, &dataset.labels, dataset.class_count)?;
        let distance = CloudDistance::new(&prepared.clouds, config.sinkhorn);
        let before = cache.evaluations();
        let e = embed_all(&all, &support, &distance, &cache)?;
        Ok((e, cache.evaluations() - before, distance.not_converged()))
    };
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for r in 0..config.repeats {
        let seed = repeat_seed(config.seed, r);
        let reference = embed(&sample(reference_eta, seed)?)?.0;
        for &eta in etas {
            let cell = format!("eta={eta}");
            let ctx = SplitContext {
                experiment: "drift",
                cell: cell.clone(),
                theta: config.mining.theta,
                fold: None,
                repeat: Some(r),
                eta: Some(eta),
                seed,
            };
            let mut rec = ctx.record(config, "none");
            rec.mine_on = MineScope::All.name().into();
            rec.fragment_count = prepared.fragments.len();
            rec.test_size = dataset.len();
            let train = match sample(eta, seed) {
                Ok(t) => t,
                Err(e @ Error::InfeasibleSplit(_)) => {
                    if !skipped.iter().any(|s: &Skipped| s.cell == cell) {
                        skipped.push(Skipped {
                            cell,
                            reason: e.to_string(),
                        });
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            rec.train_size = train.len();
            match embed(&train) {
                Ok((emb, evals, not_converged)) => {
                    let drifts: Vec<f64> = emb
                        .rows
                        .iter()
                        .zip(&reference.rows)
                        .map(|(a, b)| wasserstein2_1d(&a.values, &b.values))
                        .collect();
                    rec.value = Some(drifts.iter().sum::<f64>() / drifts.len() as f64);
                    rec.support_size = emb.support.len();
                    rec.distance_evals = evals;
                    rec.sinkhorn_not_converged = not_converged;
                    rec.degenerate_rows = emb.degenerate_rows();
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            runs.push(rec);
        }
    }
    close_cache(config, &cache, key);
    let mut meta = config.meta("drift", dataset);
    meta["mine_on"] = json!("all");
    meta["drift_etas"] = json!(etas);
    meta["reference_eta"] = json!(reference_eta);
    let mut report = Report::new(meta, runs);
    report.skipped = skipped;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Graph;

    /// Two structurally distinct families: labelled paths and labelled stars.
    fn two_families(per_class: usize) -> GraphDataset {
        let mut graphs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..2 * per_class {
            let g = if i % 2 == 0 {
                Graph::new(i, vec![0, 1, 0, 1], [(0, 1), (1, 2), (2, 3)]).unwrap()
            } else {
                Graph::new(i, vec![2, 3, 3, 3], [(0, 1), (0, 2), (0, 3)]).unwrap()
            };
            graphs.push(g);
            labels.push((i % 2) as i64);
        }
        GraphDataset::new("toy", graphs, &labels).unwrap()
    }

    fn quick() -> ExperimentConfig {
        ExperimentConfig {
            mining: MiningConfig {
                theta: 0.3,
                max_edges: 3,
            },
            embed: EmbedConfig {
                dim: 4,
                epochs: 5,
                ..Default::default()
            },
            folds: 5,
            repeats: 2,
            ..Default::default()
        }
    }

    #[test]
    fn separable_families_score_perfectly() {
        let data = two_families(10);
        let report = run_cv(&data, &quick()).unwrap();
        assert_eq!(report.runs.len(), 5);
        assert!(report.completed());
        assert!(report.runs.iter().all(|r| r.value == Some(1.0)), "{report:?}");
        let tested: usize = report.runs.iter().map(|r| r.test_size).sum();
        assert_eq!(tested, 20);
    }

    #[test]
    fn train_scope_also_runs() {
        let data = two_families(6);
        let config = ExperimentConfig {
            mine_on: MineScope::Train,
            folds: 3,
            ..quick()
        };
        let report = run_cv(&data, &config).unwrap();
        assert!(report.completed(), "{report:?}");
        assert!(report.runs.iter().all(|r| r.mine_on == "train"));
    }

    #[test]
    fn cv_rejects_single_fold() {
        let config = ExperimentConfig { folds: 1, ..quick() };
        assert!(matches!(run_cv(&two_families(3), &config), Err(Error::Config(_))));
    }

    #[test]
    fn fewshot_skips_infeasible_rates() {
        let data = two_families(10);
        let config = ExperimentConfig {
            etas: vec![0.01, 0.5],
            ..quick()
        };
        let report = run_fewshot(&data, &config).unwrap();
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.runs.len(), 2);
        for r in &report.runs {
            assert_eq!(r.train_size, 10);
            assert_eq!(r.test_size, 2);
        }
    }

    #[test]
    fn sweep_rows_follow_thetas() {
        let data = two_families(5);
        let config = ExperimentConfig { folds: 2, ..quick() };
        let report = minsup_sweep(&data, &config, &[1.0, 0.5, 0.3]).unwrap();
        let counts: Vec<usize> = report.sweep.iter().map(|r| r.fragment_count).collect();
        assert_eq!(counts[0], 0);
        assert!(report.sweep[0].degenerate);
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        assert!(minsup_sweep(&data, &config, &[0.3, 0.5]).is_err());
    }

    #[test]
    fn drift_vanishes_at_reference_rate() {
        let data = two_families(10);
        let report = drift_study(&data, &quick(), &[0.5, 0.9], 0.9).unwrap();
        let at_ref = report.cell("eta=0.9", "none").unwrap();
        assert_eq!(at_ref.mean, 0.0);
        assert!(report.cell("eta=0.5", "none").unwrap().mean >= 0.0);
    }

    #[test]
    fn payload_is_reproducible() {
        let data = two_families(6);
        let config = ExperimentConfig { folds: 3, ..quick() };
        let a = run_cv(&data, &config).unwrap();
        let b = run_cv(&data, &config).unwrap();
        assert_eq!(a.payload_json(), b.payload_json());
    }
}
