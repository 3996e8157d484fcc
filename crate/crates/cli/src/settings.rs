use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Deserializer};

use metricdist::classify::{ClassifierConfig, ClassifierKind, GammaMode};
use metricdist::embed::EmbedConfig;
use metricdist::harness::{ExperimentConfig, MineScope};
use metricdist::mining::MiningConfig;
use metricdist::ot::SinkhornConfig;

/// Accepts `"scale"`, `"0.5"` or `0.5`.
fn gamma_value<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    Ok(Option::<Raw>::deserialize(d)?.map(|r| match r {
        Raw::Num(v) => v.to_string(),
        Raw::Text(s) => s,
    }))
}

/// Every pipeline parameter, settable as a flag or as the same key in a JSON
/// config file. Flags win over the file; the file wins over defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// TU-format dataset directory
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// min-sup threshold θ
    #[arg(long)]
    pub min_sup: Option<f64>,
    /// largest fragment size in edges
    #[arg(long)]
    pub max_edges: Option<usize>,
    /// PV-DBOW vector size
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// negative samples per positive pair
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Sinkhorn regularization λ
    #[arg(long)]
    pub reg_lambda: Option<f64>,
    /// Sinkhorn iteration cap t
    #[arg(long)]
    pub sinkhorn_iters: Option<usize>,
    /// comma-separated list of knn, logreg, svm_rbf
    #[arg(long, value_delimiter = ',')]
    pub classifier: Option<Vec<String>>,
    #[arg(long)]
    pub k: Option<usize>,
    /// comma-separated ascending C values
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    /// `scale` or a positive number
    #[arg(long)]
    #[serde(default, deserialize_with = "gamma_value")]
    pub gamma: Option<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// comma-separated training sampling rates
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// test sampling rate
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// learn fragments on `all` graphs or on each split's `train` part
    #[arg(long)]
    pub mine_on: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// comma-separated descending min-sup values (sweep)
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    /// rate of the reference support set (drift)
    #[arg(long)]
    pub reference_eta: Option<f64>,
}

macro_rules! overlay {
    ($flags:ident, $file:ident, $($field:ident),*) => {
        Settings { $($field: $flags.$field.or($file.$field)),* }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> anyhow::Result<Settings> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `self` (flags) over `file`.
    pub fn over(self, file: Settings) -> Settings {
        let flags = self;
        overlay!(
            flags, file, data_dir, min_sup, max_edges, dim, epochs, negatives, reg_lambda, sinkhorn_iters, classifier, k,
            c_grid, gamma, folds, eta, zeta, repeats, seed, mine_on, cache_dir, threads, out, thetas, reference_eta
        )
    }

    pub fn data_dir(&self) -> anyhow::Result<&Path> {
        match &self.data_dir {
            Some(p) => Ok(p),
            None => bail!(metricdist::Error::Config("--data-dir is required".into())),
        }
    }

    pub fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.thetas
            .clone()
            .unwrap_or_else(|| (0..10).map(|i| (95 - 5 * i) as f64 / 100.0).collect())
    }

    pub fn reference_eta(&self) -> f64 {
        self.reference_eta.unwrap_or(0.9)
    }

    /// Resolved experiment configuration; defaults fill whatever is unset.
    pub fn experiment(&self) -> Result<ExperimentConfig, metricdist::Error> {
        let base = ExperimentConfig::default();
        let classifiers = match &self.classifier {
            Some(names) => names.iter().map(|n| n.trim().parse()).collect::<Result<Vec<ClassifierKind>, _>>()?,
            None => base.classifiers.clone(),
        };
        let gamma = match &self.gamma {
            Some(g) => g.parse::<GammaMode>()?,
            None => GammaMode::Scale,
        };
        let mine_on = match &self.mine_on {
            Some(m) => m.parse::<MineScope>()?,
            None => base.mine_on,
        };
        let dc = ClassifierConfig::default();
        let de = EmbedConfig::default();
        let ds = SinkhornConfig::default();
        let dm = MiningConfig::default();
        let config = ExperimentConfig {
            mining: MiningConfig {
                theta: self.min_sup.unwrap_or(dm.theta),
                max_edges: self.max_edges.unwrap_or(dm.max_edges),
            },
            embed: EmbedConfig {
                dim: self.dim.unwrap_or(de.dim),
                epochs: self.epochs.unwrap_or(de.epochs),
                negatives: self.negatives.unwrap_or(de.negatives),
                ..de
            },
            sinkhorn: SinkhornConfig {
                lambda: self.reg_lambda.unwrap_or(ds.lambda),
                max_iters: self.sinkhorn_iters.unwrap_or(ds.max_iters),
                ..ds
            },
            classifier: ClassifierConfig {
                kind: classifiers[0],
                k: self.k.unwrap_or(dc.k),
                c_grid: self.c_grid.clone().unwrap_or(dc.c_grid.clone()),
                gamma,
                ..dc
            },
            classifiers,
            folds: self.folds.unwrap_or(base.folds),
            etas: self.eta.clone().unwrap_or(base.etas.clone()),
            zeta: self.zeta.unwrap_or(base.zeta),
            repeats: self.repeats.unwrap_or(base.repeats),
            seed: self.seed.unwrap_or(base.seed),
            mine_on,
            cache_dir: self.cache_dir.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}
