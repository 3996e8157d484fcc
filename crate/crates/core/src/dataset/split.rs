use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GraphDataset;
use crate::error::{Error, Result};

/// Train/test sampling rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub eta: f64,
    pub zeta: f64,
    pub seed: u64,
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        let in_range = |v: f64| v > 0.0 && v <= 1.0;
        if !in_range(self.eta) || !(self.zeta >= 0.0 && self.zeta <= 1.0) {
            return Err(Error::Config(format!(
                "eta={} and zeta={} must lie in (0, 1]",
                self.eta, self.zeta
            )));
        }
        if self.eta + self.zeta > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "eta + zeta = {} exceeds 1",
                self.eta + self.zeta
            )));
        }
        Ok(())
    }
}

/// One cross-validation fold, ids ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Largest-remainder apportionment of `total` over `weights`, each share
/// capped at `caps[k]`. Ties on the remainder go to the lower index.
fn apportion(total: usize, weights: &[usize], caps: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    // quota of k is (w_k · total) / sum; remainders compared exactly
    let mut counts: Vec<usize> = weights
        .iter()
        .zip(caps)
        .map(|(&w, &c)| (w * total / sum).min(c))
        .collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = weights[a] * total % sum;
        let rb = weights[b] * total % sum;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = counts.iter().sum();
    // First pass hands out remainders; later passes fill whatever capacity is left.
    while assigned < total {
        let before = assigned;
        for &k in &order {
            if assigned == total {
                break;
            }
            if counts[k] < caps[k] {
                counts[k] += 1;
                assigned += 1;
            }
        }
        if assigned == before {
            break;
        }
    }
    counts
}

fn shuffled_classes(dataset: &GraphDataset, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class = dataset.ids_by_class();
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }
    by_class
}

/// Per-class training counts: proportional to class frequency, at least one
/// per class.
pub(crate) fn train_counts(class_sizes: &[usize], n_train: usize) -> Vec<usize> {
    let k = class_sizes.len();
    let mut counts = apportion(n_train, class_sizes, class_sizes);
    for c in 0..k {
        while counts[c] == 0 && class_sizes[c] > 0 {
            // Take one from the class most above its quota.
            let total: usize = class_sizes.iter().sum();
            let donor = (0..k)
                .filter(|&d| counts[d] > 1)
                .max_by(|&a, &b| {
                    // excess over quota, scaled by `total`
                    let ea = (counts[a] * total) as i128 - (n_train * class_sizes[a]) as i128;
                    let eb = (counts[b] * total) as i128 - (n_train * class_sizes[b]) as i128;
                    ea.cmp(&eb).then(b.cmp(&a))
                });
            match donor {
                Some(d) => counts[d] -= 1,
                None => break,
            }
            counts[c] += 1;
        }
    }
    counts
}

/// Stratified train/test sample.
///
/// The training part has `round(eta * N)` graphs split across classes by
/// largest remainder with at least one graph per class. The test part has
/// `round(zeta * N)` graphs (as far as the remainder allows) drawn from the
/// graphs not used for training, again split proportionally.
pub fn stratified_sample(
    dataset: &GraphDataset,
    config: &SplitConfig,
) -> Result<(Vec<usize>, Vec<usize>)> {
    config.validate()?;
    let n = dataset.len();
    let k = dataset.class_count;
    if config.eta * (n as f64) < k as f64 {
        return Err(Error::InfeasibleSplit(format!(
            "eta={} over {n} graphs cannot cover {k} classes",
            config.eta
        )));
    }
    let n_train = ((config.eta * n as f64).round() as usize).clamp(k, n);
    let classes = shuffled_classes(dataset, config.seed);
    let sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
    let train_per_class = train_counts(&sizes, n_train);

    let remaining: Vec<usize> = sizes
        .iter()
        .zip(&train_per_class)
        .map(|(s, t)| s - t)
        .collect();
    let n_test = ((config.zeta * n as f64).round() as usize).min(remaining.iter().sum());
    let test_per_class = apportion(n_test, &sizes, &remaining);

    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n_test);
    for (c, members) in classes.iter().enumerate() {
        let t = train_per_class[c];
        train.extend_from_slice(&members[..t]);
        test.extend_from_slice(&members[t..t + test_per_class[c]]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified k-fold partition.
///
/// Each class is shuffled and dealt round-robin over the folds, continuing
/// from the fold where the previous class stopped, so fold sizes differ by at
/// most one and every fold's class counts are within one of the global
/// proportion.
pub fn stratified_kfold(dataset: &GraphDataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    let n = dataset.len();
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::Config(format!("k={k} exceeds dataset size {n}")));
    }
    let classes = shuffled_classes(dataset, seed);
    let mut assignment = vec![0usize; n];
    let mut next = 0usize;
    for members in &classes {
        for &id in members {
            assignment[id] = next % k;
            next += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}
