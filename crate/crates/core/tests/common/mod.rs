//! Brute-force reference implementations and fixtures shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use metricdist::dataset::{load_tudataset, Graph, GraphDataset, Label};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn graph(id: usize, labels: &[Label], edges: &[(usize, usize)]) -> Graph {
    Graph::new(id, labels.to_vec(), edges.iter().copied()).unwrap()
}

pub fn mutag_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}

pub fn mutag() -> GraphDataset {
    load_tudataset(mutag_dir()).expect("MUTAG ships with the repository")
}

/// Every permutation of `0..n`, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Lexicographically smallest (labels, sorted edges) over all relabelings
/// of the vertices. Equal exactly for label-preserving isomorphic graphs.
pub fn brute_canonical(g: &Graph) -> (Vec<Label>, Vec<(usize, usize)>) {
    let n = g.node_count();
    permutations(n)
        .into_iter()
        .map(|p| {
            let mut labels = vec![0; n];
            for v in 0..n {
                labels[p[v]] = g.label(v);
            }
            let mut edges: Vec<(usize, usize)> = g
                .edges()
                .iter()
                .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                .collect();
            edges.sort_unstable();
            (labels, edges)
        })
        .min()
        .unwrap()
}

/// Whether some injective, label-preserving map sends every pattern edge to
/// a target edge. Plain exhaustive search without pruning.
pub fn brute_contains(target: &Graph, pattern: &Graph) -> bool {
    fn extend(target: &Graph, pattern: &Graph, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let v = map.len();
        if v == pattern.node_count() {
            return pattern.edges().iter().all(|&(a, b)| target.has_edge(map[a], map[b]));
        }
        for t in 0..target.node_count() {
            if !used[t] && target.label(t) == pattern.label(v) {
                used[t] = true;
                map.push(t);
                if extend(target, pattern, map, used) {
                    return true;
                }
                map.pop();
                used[t] = false;
            }
        }
        false
    }
    pattern.node_count() <= target.node_count()
        && extend(target, pattern, &mut Vec::new(), &mut vec![false; target.node_count()])
}

/// A random simple graph with `n` nodes, edge probability `p` and labels in
/// `0..alphabet`.
pub fn random_graph(rng: &mut ChaCha8Rng, id: usize, n: usize, p: f64, alphabet: Label) -> Graph {
    let labels: Vec<Label> = (0..n).map(|_| rng.random_range(0..alphabet)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(id, labels, edges).unwrap()
}

/// A random connected graph: a random spanning tree plus extra edges.
pub fn random_connected(rng: &mut ChaCha8Rng, id: usize, n: usize, extra: usize, alphabet: Label) -> Graph {
    let labels: Vec<Label> = (0..n).map(|_| rng.random_range(0..alphabet)).collect();
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    Graph::new(id, labels, edges).unwrap()
}

/// Connected subgraphs of `g` induced by edge subsets of size `1..=max_edges`,
/// rebuilt as standalone graphs.
pub fn connected_edge_subgraphs(g: &Graph, max_edges: usize) -> Vec<Graph> {
    let m = g.edge_count();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << m) {
        let k = mask.count_ones() as usize;
        if k > max_edges {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| g.edges()[i]).collect();
        let mut nodes: Vec<usize> = chosen.iter().flat_map(|&(a, b)| [a, b]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let pos = |v: usize| nodes.binary_search(&v).unwrap();
        let labels: Vec<Label> = nodes.iter().map(|&v| g.label(v)).collect();
        let sub = Graph::new(0, labels, chosen.iter().map(|&(a, b)| (pos(a), pos(b)))).unwrap();
        if sub.is_connected() {
            out.push(sub);
        }
    }
    out
}

/// Nearest-neighbor vote by a full sort of Euclidean distances: distance ties
/// go to the lower index, vote ties to the lower class.
pub fn knn_brute(train_x: &[Vec<f64>], train_y: &[usize], query: &[f64], k: usize) -> usize {
    let mut order: Vec<(f64, usize)> = train_x
        .iter()
        .enumerate()
        .map(|(i, x)| (x.iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let classes = train_y.iter().max().unwrap() + 1;
    let mut votes = vec![0usize; classes];
    for &(_, i) in order.iter().take(k) {
        votes[train_y[i]] += 1;
    }
    let best = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == best).unwrap()
}

/// Maximum of the soft-margin dual `Σα − ½ αᵀQα` over `0 ≤ α ≤ C`,
/// `yᵀα = 0`, with `Q = (y yᵀ) ∘ K`, by enumerating every assignment of each
/// coordinate to {0, C, free}. On each face the stationary point of the
/// equality-constrained problem comes from one dense KKT solve; feasible
/// candidates are compared.
pub fn svm_dual_oracle(kernel: &metricdist::ot::Matrix, y: &[f64], c: f64) -> f64 {
    use nalgebra::{DMatrix, DVector};
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[(i, j)];
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q(i, j);
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        // 0 → α = 0, 1 → α = C, 2 → free
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let fixed_balance: f64 = (0..n).filter(|&i| state[i] == 1).map(|i| y[i] * c).sum();
        if free.is_empty() {
            if fixed_balance.abs() > 1e-12 * c.max(1.0) {
                continue;
            }
        } else {
            let f = free.len();
            let mut a = DMatrix::<f64>::zeros(f + 1, f + 1);
            let mut b = DVector::<f64>::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q(i, j);
                }
                a[(r, f)] = y[i];
                a[(f, r)] = y[i];
                b[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q(i, j) * c).sum::<f64>();
            }
            b[f] = -fixed_balance;
            let Some(sol) = a.lu().solve(&b) else { continue };
            let tol = 1e-9 * c.max(1.0);
            if free.iter().enumerate().any(|(r, _)| sol[r] < -tol || sol[r] > c + tol) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        best = best.max(objective(&alpha));
    }
    best
}

/// Every connected graph on `n` nodes with at most `max_edges` edges, up to
/// vertex numbering, as edge lists over `0..n`.
pub fn connected_edge_sets(n: usize, max_edges: usize) -> Vec<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << all.len()) {
        let k = mask.count_ones() as usize;
        if k + 1 < n || k > max_edges {
            continue;
        }
        let edges: Vec<(usize, usize)> = (0..all.len()).filter(|i| mask >> i & 1 == 1).map(|i| all[i]).collect();
        if graph(0, &vec![0; n], &edges).is_connected() {
            out.push(edges);
        }
    }
    out
}
