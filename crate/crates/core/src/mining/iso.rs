//! Label-preserving subgraph containment (non-induced monomorphism) by
//! backtracking with label and degree pruning.

use std::collections::HashMap;

use crate::dataset::{Graph, Label};

/// Pattern vertices in matching order, each with the earlier neighbors its
/// image must be adjacent to.
struct MatchPlan {
    order: Vec<usize>,
    /// for order[k]: positions (< k) of earlier pattern neighbors
    back_links: Vec<Vec<usize>>,
}

fn plan(pattern: &Graph, target: &Graph) -> MatchPlan {
    let n = pattern.node_count();
    let mut freq: HashMap<Label, usize> = HashMap::new();
    for &l in target.labels() {
        *freq.entry(l).or_default() += 1;
    }
    // Start from the pattern vertex whose label is rarest in the target,
    // preferring high degree.
    let start = (0..n)
        .min_by_key(|&v| {
            (
                freq.get(&pattern.label(v)).copied().unwrap_or(0),
                std::cmp::Reverse(pattern.degree(v)),
                v,
            )
        })
        .expect("pattern has nodes");
    let mut position = vec![usize::MAX; n];
    let mut order = vec![start];
    position[start] = 0;
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| position[v] == usize::MAX)
            .max_by_key(|&v| {
                let links = pattern
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| position[w] != usize::MAX)
                    .count();
                (links, pattern.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        position[next] = order.len();
        order.push(next);
    }
    let back_links = order
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut links: Vec<usize> = pattern
                .neighbors(v)
                .iter()
                .map(|&w| position[w])
                .filter(|&p| p < k)
                .collect();
            links.sort_unstable();
            links
        })
        .collect();
    MatchPlan { order, back_links }
}

/// True when `target` contains a subgraph isomorphic to `pattern` with
/// matching node labels. Extra edges among the matched target nodes are
/// allowed.
pub fn contains(target: &Graph, pattern: &Graph) -> bool {
    if pattern.node_count() > target.node_count() || pattern.edge_count() > target.edge_count() {
        return false;
    }
    let mut need: HashMap<Label, usize> = HashMap::new();
    for &l in pattern.labels() {
        *need.entry(l).or_default() += 1;
    }
    let mut have: HashMap<Label, usize> = HashMap::new();
    for &l in target.labels() {
        *have.entry(l).or_default() += 1;
    }
    if need.iter().any(|(l, &c)| have.get(l).copied().unwrap_or(0) < c) {
        return false;
    }
    let plan = plan(pattern, target);
    let mut image = vec![usize::MAX; pattern.node_count()];
    let mut taken = vec![false; target.node_count()];
    extend(target, pattern, &plan, 0, &mut image, &mut taken)
}

fn feasible(target: &Graph, pattern: &Graph, pv: usize, tv: usize, taken: &[bool]) -> bool {
    !taken[tv] && target.label(tv) == pattern.label(pv) && target.degree(tv) >= pattern.degree(pv)
}

fn extend(
    target: &Graph,
    pattern: &Graph,
    plan: &MatchPlan,
    k: usize,
    image: &mut [usize],
    taken: &mut [bool],
) -> bool {
    if k == plan.order.len() {
        return true;
    }
    let pv = plan.order[k];
    let links = &plan.back_links[k];
    let try_candidate = |tv: usize, image: &mut [usize], taken: &mut [bool]| -> bool {
        if !feasible(target, pattern, pv, tv, taken) {
            return false;
        }
        if !links
            .iter()
            .all(|&p| target.has_edge(image[plan.order[p]], tv))
        {
            return false;
        }
        image[pv] = tv;
        taken[tv] = true;
        let found = extend(target, pattern, plan, k + 1, image, taken);
        taken[tv] = false;
        image[pv] = usize::MAX;
        found
    };
    if let Some(&anchor) = links.first() {
        let anchor_image = image[plan.order[anchor]];
        for &tv in target.neighbors(anchor_image) {
            if try_candidate(tv, image, taken) {
                return true;
            }
        }
    } else {
        for tv in 0..target.node_count() {
            if try_candidate(tv, image, taken) {
                return true;
            }
        }
    }
    false
}
