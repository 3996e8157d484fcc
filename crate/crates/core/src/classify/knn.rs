use crate::error::{Error, Result};

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority vote among the `k` training points nearest to `query` in
/// Euclidean distance.
///
/// Equal distances are ordered by training index; tied votes go to the lower
/// class index.
pub fn knn_predict(train_x: &[Vec<f64>], train_y: &[usize], query: &[f64], k: usize) -> Result<usize> {
    if train_x.is_empty() {
        return Err(Error::Classifier("kNN needs a nonempty training set".into()));
    }
    if train_x.len() != train_y.len() {
        return Err(Error::LengthMismatch(train_x.len(), train_y.len()));
    }
    if k == 0 || k > train_x.len() {
        return Err(Error::Classifier(format!(
            "k={k} must lie in 1..={}",
            train_x.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = train_x
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(p, query), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, by_distance);
        order.truncate(k);
    }
    let classes = train_y.iter().max().map_or(0, |m| m + 1);
    let mut votes = vec![0usize; classes];
    for &(_, i) in &order {
        votes[train_y[i]] += 1;
    }
    // max_by_key keeps the last maximum; scan in reverse to prefer low classes
    Ok((0..classes).rev().max_by_key(|&c| votes[c]).unwrap())
}
