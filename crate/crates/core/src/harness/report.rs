use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall-clock seconds per stage. Excluded from payload comparisons.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub mining_s: f64,
    pub embedding_s: f64,
    pub distances_s: f64,
    pub fit_s: f64,
}

/// One evaluated cell: a fold, a few-shot repeat, or a drift repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    /// Label of the aggregation cell this run belongs to, e.g. `eta=0.2`.
    pub cell: String,
    pub classifier: String,
    pub theta: f64,
    pub fold: Option<usize>,
    pub repeat: Option<usize>,
    pub eta: Option<f64>,
    pub seed: u64,
    pub mine_on: String,
    /// Accuracy, or mean drift for drift runs; absent when the run failed.
    pub value: Option<f64>,
    pub error: Option<String>,
    pub train_size: usize,
    pub test_size: usize,
    pub support_size: usize,
    pub fragment_count: usize,
    pub distance_evals: usize,
    pub sinkhorn_not_converged: usize,
    pub degenerate_rows: usize,
    pub chosen_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<StageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub cell: String,
    pub classifier: String,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub cells: Vec<CellAggregate>,
}

/// A `(cell, reason)` pair for cells that were not run at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub cell: String,
    pub reason: String,
}

/// Min-sup sweep summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub fragment_count: usize,
    pub degenerate: bool,
    pub mean_accuracy: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: serde_json::Value,
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub skipped: Vec<Skipped>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sweep: Vec<SweepRow>,
}

/// Population mean and standard deviation; `(NaN, NaN)` for no values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates successful runs overall and per `(cell, classifier)`, cells in
/// first-appearance order.
pub fn aggregate(runs: &[RunRecord]) -> Aggregate {
    let all: Vec<f64> = runs.iter().filter_map(|r| r.value).collect();
    let (mean, std) = mean_std(&all);
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in runs {
        let key = (r.cell.clone(), r.classifier.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let cells = keys
        .into_iter()
        .map(|(cell, classifier)| {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| r.cell == cell && r.classifier == classifier)
                .filter_map(|r| r.value)
                .collect();
            let (mean, std) = mean_std(&values);
            CellAggregate {
                cell,
                classifier,
                runs: values.len(),
                mean,
                std,
            }
        })
        .collect();
    Aggregate { mean, std, cells }
}

impl Report {
    pub fn new(meta: serde_json::Value, runs: Vec<RunRecord>) -> Self {
        let aggregate = aggregate(&runs);
        Report {
            meta,
            runs,
            aggregate,
            skipped: Vec::new(),
            sweep: Vec::new(),
        }
    }

    /// Whether every run produced a value.
    pub fn completed(&self) -> bool {
        self.runs.iter().all(|r| r.error.is_none())
    }

    pub fn cell(&self, cell: &str, classifier: &str) -> Option<&CellAggregate> {
        self.aggregate
            .cells
            .iter()
            .find(|c| c.cell == cell && c.classifier == classifier)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The JSON report with every timing field removed.
    pub fn payload_json(&self) -> String {
        let mut clone = self.clone();
        clone.runs.iter_mut().for_each(|r| r.timing = None);
        clone.to_json()
    }

    /// `experiment,cell,classifier,runs,mean,std`, one row per cell.
    pub fn summary_csv(&self) -> String {
        let experiment = self.runs.first().map_or("", |r| r.experiment.as_str());
        let mut out = String::from("experiment,cell,classifier,runs,mean,std\n");
        for c in &self.aggregate.cells {
            writeln!(out, "{experiment},{},{},{},{:?},{:?}", c.cell, c.classifier, c.runs, c.mean, c.std).unwrap();
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join(format!("{stem}.json"));
        fs::write(&json, self.to_json()).map_err(|e| Error::io(&json, e))?;
        let csv = dir.join(format!("{stem}.csv"));
        fs::write(&csv, self.summary_csv()).map_err(|e| Error::io(&csv, e))
    }

    pub fn read(path: &Path) -> Result<Report> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}
