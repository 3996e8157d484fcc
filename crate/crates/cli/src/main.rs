mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use metricdist::classify::{self, read_model, write_model};
use metricdist::dataset::{load_tudataset, stratified_sample, GraphDataset, SplitConfig};
use metricdist::embed::write_table;
use metricdist::harness::{self, ExperimentConfig, Report};
use metricdist::metric::{build_support_set, embed_all, read_embedding_csv, write_embedding_csv, CloudDistance, DistanceCache};
use metricdist::mining::{mine_frequent_fragments, write_fragments};
use metricdist::ot::write_distance_matrix;
use metricdist::Error;

use settings::Settings;

#[derive(Parser)]
#[command(name = "metricdist", version, about = "Graph classification by metric-distribution embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file with the same keys as the flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

impl Common {
    fn resolve(self) -> anyhow::Result<Settings> {
        let file = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        Ok(self.settings.over(file))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent fragments and write them to <out>/fragments.tsv
    Mine(Common),
    /// Mine fragments and train PV-DBOW vectors
    EmbedFragments(Common),
    /// Full pairwise Wasserstein distance matrix
    Distances(Common),
    /// Metric-distribution vectors against a stratified support set
    EmbedMetric(Common),
    /// Stratified k-fold cross-validation
    Cv(Common),
    /// Few-shot sampling-rate study
    Fewshot(Common),
    /// Min-sup sensitivity sweep
    Sweep(Common),
    /// Metric-distribution drift against a reference support set
    Drift(Common),
    /// Inspect or clear the distance-matrix cache
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Fit or apply a classifier on metric-embedding CSV files
    Classify(ClassifyArgs),
}

#[derive(Subcommand)]
enum CacheAction {
    List(Common),
    Clear(Common),
}

#[derive(Args)]
struct ClassifyArgs {
    /// training rows (graph_id,label,values...)
    #[arg(long)]
    train: Option<PathBuf>,
    /// rows to predict
    #[arg(long)]
    test: Option<PathBuf>,
    /// load this model instead of fitting one
    #[arg(long)]
    model: Option<PathBuf>,
    /// write the fitted model here
    #[arg(long)]
    save_model: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// Distinguishes invalid input (exit 2) from pipeline failures (exit 1).
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InfeasibleSplit(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn setup(common: Common) -> anyhow::Result<(Settings, ExperimentConfig)> {
    let settings = common.resolve()?;
    let config = settings.experiment()?;
    if let Some(n) = settings.threads {
        init_threads(n)?;
    }
    Ok((settings, config))
}

#[cfg(feature = "parallel")]
fn init_threads(n: usize) -> anyhow::Result<()> {
    if n == 0 {
        anyhow::bail!(Error::Config("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("building thread pool")
}

#[cfg(not(feature = "parallel"))]
fn init_threads(_n: usize) -> anyhow::Result<()> {
    log::warn!("built without the parallel feature; --threads is ignored");
    Ok(())
}

fn load(settings: &Settings) -> anyhow::Result<GraphDataset> {
    let dir = settings.data_dir()?;
    Ok(load_tudataset(dir)?)
}

fn out_dir(settings: &Settings) -> anyhow::Result<PathBuf> {
    let out = settings.out();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Mine(c) => mine(c),
        Command::EmbedFragments(c) => embed_fragments(c),
        Command::Distances(c) => distances(c),
        Command::EmbedMetric(c) => embed_metric(c),
        Command::Cv(c) => experiment(c, "cv"),
        Command::Fewshot(c) => experiment(c, "fewshot"),
        Command::Sweep(c) => experiment(c, "sweep"),
        Command::Drift(c) => experiment(c, "drift"),
        Command::Cache { action } => cache(action),
        Command::Classify(args) => classify_cmd(args),
    }
}

fn mine(common: Common) -> anyhow::Result<bool> {
    let (settings, config) = setup(common)?;
    let data = load(&settings)?;
    let fragments = mine_frequent_fragments(&data, &config.mining)?;
    let path = out_dir(&settings)?.join("fragments.tsv");
    write_fragments(&path, &fragments)?;
    println!(
        "mine {}: {} fragments at min-sup {} (max {} edges) -> {}",
        data.name,
        fragments.len(),
        config.mining.theta,
        config.mining.max_edges,
        path.display()
    );
    Ok(true)
}

fn embed_fragments(common: Common) -> anyhow::Result<bool> {
    let (settings, config) = setup(common)?;
    let data = load(&settings)?;
    let prepared = harness::prepare(&data, &config.mining, &config.embed_config(), None)?;
    let out = out_dir(&settings)?;
    write_fragments(out.join("fragments.tsv"), &prepared.fragments)?;
    write_table(out.join("embeddings.txt"), &prepared.table)?;
    println!(
        "embed-fragments {}: {} fragments, {} graphs, dim {} -> {}",
        data.name,
        prepared.fragments.len(),
        data.len(),
        prepared.table.dim,
        out.display()
    );
    Ok(true)
}

fn distances(common: Common) -> anyhow::Result<bool> {
    let (settings, config) = setup(common)?;
    let data = load(&settings)?;
    let prepared = harness::prepare(&data, &config.mining, &config.embed_config(), None)?;
    let key = config.cache_key(&data, "all".into());
    let cache = match &config.cache_dir {
        Some(dir) => DistanceCache::load_or_new(dir, &key, data.len()),
        None => DistanceCache::new(data.len()),
    };
    let n = data.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let distance = CloudDistance::new(&prepared.clouds, config.sinkhorn);
    let fresh = cache.ensure(&pairs, &distance)?;
    if let Some(dir) = &config.cache_dir {
        cache.save(dir, &key)?;
    }
    let path = out_dir(&settings)?.join("distances.bin");
    write_distance_matrix(&path, &cache.to_matrix())?;
    println!(
        "distances {}: {n}x{n}, {fresh} evaluated, {} cached, {} not converged -> {}",
        data.name,
        pairs.len() - fresh,
        distance.not_converged(),
        path.display()
    );
    Ok(true)
}

fn embed_metric(common: Common) -> anyhow::Result<bool> {
    let (settings, config) = setup(common)?;
    let data = load(&settings)?;
    let prepared = harness::prepare(&data, &config.mining, &config.embed_config(), None)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let train = match settings.eta.as_deref() {
        Some([eta, ..]) => {
            stratified_sample(&data, &SplitConfig { eta: *eta, zeta: 0.0, seed: config.seed })?.0
        }
        _ => all.clone(),
    };
    let support = build_support_set(&train, &data.labels, data.class_count)?;
    let key = config.cache_key(&data, "all".into());
    let cache = match &config.cache_dir {
        Some(dir) => DistanceCache::load_or_new(dir, &key, data.len()),
        None => DistanceCache::new(data.len()),
    };
    let distance = CloudDistance::new(&prepared.clouds, config.sinkhorn);
    let embedding = embed_all(&all, &support, &distance, &cache)?;
    if let Some(dir) = &config.cache_dir {
        cache.save(dir, &key)?;
    }
    let path = out_dir(&settings)?.join("metric_embedding.csv");
    write_embedding_csv(&path, &embedding, &data.labels)?;
    println!(
        "embed-metric {}: {} graphs x {} support, {} degenerate -> {}",
        data.name,
        embedding.rows.len(),
        support.len(),
        embedding.degenerate_rows(),
        path.display()
    );
    Ok(true)
}

fn print_cells(name: &str, report: &Report) {
    for c in &report.aggregate.cells {
        println!("{name} {} {}: mean={:.4} std={:.4} runs={}", c.cell, c.classifier, c.mean, c.std, c.runs);
    }
    for s in &report.skipped {
        println!("{name} {}: skipped ({})", s.cell, s.reason);
    }
    for r in report.runs.iter().filter(|r| r.error.is_some()) {
        eprintln!("{name} {} {}: failed: {}", r.cell, r.classifier, r.error.as_deref().unwrap_or(""));
    }
}

fn experiment(common: Common, name: &str) -> anyhow::Result<bool> {
    let (settings, mut config) = setup(common)?;
    let data = load(&settings)?;
    let report = match name {
        "cv" => harness::run_cv(&data, &config)?,
        "fewshot" => harness::run_fewshot(&data, &config)?,
        "sweep" => harness::minsup_sweep(&data, &config, &settings.thetas())?,
        "drift" => {
            let etas = settings.eta.clone().unwrap_or_else(|| vec![0.05, 0.20, 0.50]);
            config.etas = etas.clone();
            harness::drift_study(&data, &config, &etas, settings.reference_eta())?
        }
        _ => unreachable!(),
    };
    let out = out_dir(&settings)?;
    report.write(&out, name)?;
    for row in &report.sweep {
        println!(
            "sweep theta={}: {} fragments{}",
            row.theta,
            row.fragment_count,
            if row.degenerate { " (degenerate)" } else { "" }
        );
    }
    print_cells(name, &report);
    Ok(report.completed())
}

fn cache(action: CacheAction) -> anyhow::Result<bool> {
    let (common, clear) = match action {
        CacheAction::List(c) => (c, false),
        CacheAction::Clear(c) => (c, true),
    };
    let settings = common.resolve()?;
    let Some(dir) = settings.cache_dir.as_deref() else {
        anyhow::bail!(Error::Config("--cache-dir is required".into()));
    };
    if clear {
        let removed = DistanceCache::clear(dir)?;
        println!("cache: removed {removed} entries from {}", dir.display());
        return Ok(true);
    }
    let entries = DistanceCache::list(dir)?;
    for e in &entries {
        let params = e
            .key
            .as_ref()
            .map_or_else(|| "missing sidecar".to_string(), |k| serde_json::to_string(k).unwrap());
        println!("{}\t{} filled\t{}", e.matrix.display(), e.filled, params);
    }
    println!("cache: {} entries in {}", entries.len(), dir.display());
    Ok(true)
}

fn read_rows(path: &Path) -> anyhow::Result<(Vec<usize>, Vec<Vec<f64>>, Vec<usize>)> {
    let rows = read_embedding_csv(path)?;
    let ids = rows.iter().map(|r| r.0).collect();
    let labels = rows.iter().map(|r| r.1).collect();
    let x = rows.into_iter().map(|r| r.2).collect();
    Ok((ids, x, labels))
}

fn classify_cmd(args: ClassifyArgs) -> anyhow::Result<bool> {
    let (settings, config) = setup(args.common)?;
    let model = match (&args.model, &args.train) {
        (Some(path), _) => read_model(path)?,
        (None, Some(train)) => {
            let (_, x, y) = read_rows(train)?;
            let classes = y.iter().max().map_or(0, |m| m + 1).max(2);
            let model = classify::fit(&x, &y, classes, &config.classifier)?;
            println!("classify: fitted {} on {} rows", model.kind, x.len());
            model
        }
        (None, None) => anyhow::bail!(Error::Config("either --model or --train is required".into())),
    };
    if let Some(path) = &args.save_model {
        write_model(path, &model)?;
    }
    if let Some(test) = &args.test {
        let (ids, x, y) = read_rows(test)?;
        let predictions = model.predict(&x)?;
        let mut out = String::from("graph_id,prediction\n");
        for (id, p) in ids.iter().zip(&predictions) {
            out.push_str(&format!("{id},{p}\n"));
        }
        let path = out_dir(&settings)?.join("predictions.csv");
        fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
        println!(
            "classify: accuracy {:.4} on {} rows -> {}",
            classify::accuracy(&predictions, &y)?,
            ids.len(),
            path.display()
        );
    }
    Ok(true)
}
