mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use common::*;
use metricdist::dataset::{Graph, GraphDataset, Label};
use metricdist::mining::{canonical_code, contains, decompose, mine_frequent_fragments, support, Fragment, MiningConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Canon = (Vec<Label>, Vec<(usize, usize)>);

#[test]
fn canonical_code_matches_brute_force_isomorphism_exhaustively() {
    let mut by_canon: HashMap<Canon, BTreeSet<Vec<u8>>> = HashMap::new();
    let mut codes: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut checked = 0usize;
    for n in 2..=5 {
        let edge_sets = connected_edge_sets(n, 4);
        for labeling in 0..3usize.pow(n as u32) {
            let labels: Vec<Label> = (0..n).map(|i| (labeling / 3usize.pow(i as u32) % 3) as Label).collect();
            for edges in &edge_sets {
                let g = graph(0, &labels, edges);
                let code = format!("{:?}", canonical_code(&g).unwrap()).into_bytes();
                codes.insert(code.clone());
                by_canon.entry(brute_canonical(&g)).or_default().insert(code);
                checked += 1;
            }
        }
    }
    assert!(checked > 30_000);
    // isomorphic graphs share one code ...
    assert!(by_canon.values().all(|c| c.len() == 1));
    // ... and non-isomorphic graphs never do
    assert_eq!(codes.len(), by_canon.len());
}

#[test]
fn relabelings_of_a_labeled_path_share_one_code_per_class() {
    let labels = [0, 1, 2];
    let mut classes: BTreeMap<Canon, BTreeSet<String>> = BTreeMap::new();
    for perm in permutations(3) {
        for center in 0..3 {
            let others: Vec<usize> = (0..3).filter(|&v| v != center).collect();
            let l: Vec<Label> = perm.iter().map(|&p| labels[p]).collect();
            let g = graph(0, &l, &[(center, others[0]), (center, others[1])]);
            classes
                .entry(brute_canonical(&g))
                .or_default()
                .insert(format!("{:?}", canonical_code(&g).unwrap()));
        }
    }
    // three distinct centre labels, each one isomorphism class
    assert_eq!(classes.len(), 3);
    assert!(classes.values().all(|c| c.len() == 1));
}

/// Frequent connected fragments by exhaustive edge-subset enumeration.
fn brute_frequent(dataset: &GraphDataset, max_edges: usize, theta: f64) -> BTreeMap<Canon, f64> {
    let mut presence: BTreeMap<Canon, BTreeSet<usize>> = BTreeMap::new();
    for (gi, g) in dataset.graphs.iter().enumerate() {
        for sub in connected_edge_subgraphs(g, max_edges) {
            presence.entry(brute_canonical(&sub)).or_default().insert(gi);
        }
    }
    presence
        .into_iter()
        .map(|(c, ids)| (c, ids.len() as f64 / dataset.len() as f64))
        .filter(|&(_, s)| s >= theta)
        .collect()
}

fn mined(dataset: &GraphDataset, max_edges: usize, theta: f64) -> BTreeMap<Canon, f64> {
    let fragments = mine_frequent_fragments(dataset, &MiningConfig { theta, max_edges }).unwrap();
    let map: BTreeMap<Canon, f64> = fragments
        .iter()
        .map(|f| (brute_canonical(&f.fragment.to_graph()), f.support))
        .collect();
    assert_eq!(map.len(), fragments.len(), "duplicate fragments in the mined list");
    map
}

fn random_dataset(seed: u64, count: usize, nodes: usize, alphabet: Label) -> GraphDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs: Vec<Graph> = (0..count).map(|i| random_connected(&mut rng, i, nodes, 2, alphabet)).collect();
    let labels: Vec<i64> = (0..count as i64).map(|i| i % 2).collect();
    GraphDataset::new("random", graphs, &labels).unwrap()
}

#[test]
fn mining_matches_exhaustive_enumeration() {
    for seed in 0..4 {
        let ds = random_dataset(seed, 6, 6, 2);
        for theta in [0.0, 0.3, 0.5, 1.0] {
            assert_eq!(mined(&ds, 3, theta), brute_frequent(&ds, 3, theta), "seed {seed} theta {theta}");
        }
    }
}

#[test]
fn two_molecules_at_full_support_share_exactly_the_common_fragments() {
    // a C-C-O chain with a branch, and a C-C-O chain closed into a ring
    let a = graph(0, &[0, 0, 1, 0], &[(0, 1), (1, 2), (1, 3)]);
    let b = graph(1, &[0, 0, 1, 0], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
    let ds = GraphDataset::new("pair", vec![a.clone(), b.clone()], &[0, 1]).unwrap();
    let full = mined(&ds, 4, 1.0);
    let half = mined(&ds, 4, 0.5);
    let expected: BTreeSet<Canon> = connected_edge_subgraphs(&a, 4)
        .iter()
        .filter(|s| brute_contains(&b, s))
        .map(brute_canonical)
        .collect();
    assert_eq!(full.keys().cloned().collect::<BTreeSet<_>>(), expected);
    assert!(full.keys().all(|k| half.contains_key(k)));
    assert!(half.len() > full.len());

    let fragments = mine_frequent_fragments(&ds, &MiningConfig { theta: 1.0, max_edges: 4 }).unwrap();
    for g in [&a, &b] {
        assert_eq!(decompose(g, &fragments).fragment_ids, (0..fragments.len()).collect::<Vec<_>>());
    }
}

#[test]
fn single_edge_support_over_toy_set() {
    let ds = GraphDataset::new(
        "toy",
        vec![
            graph(0, &[0, 0], &[(0, 1)]),
            graph(1, &[0, 1, 0], &[(0, 1), (1, 2)]),
            graph(2, &[0, 0, 0], &[(0, 1), (1, 2)]),
            graph(3, &[1, 0, 0], &[(0, 1), (1, 2)]),
        ],
        &[0, 0, 1, 1],
    )
    .unwrap();
    let edge = Fragment::from_graph(&graph(0, &[0, 0], &[(0, 1)])).unwrap();
    let brute = ds.graphs.iter().filter(|g| brute_contains(g, &edge.to_graph())).count() as f64 / 4.0;
    assert_eq!(brute, 0.75);
    assert_eq!(support(&edge, &ds), brute);
    let universal = Fragment::from_graph(&graph(0, &[0, 1], &[(0, 1)])).unwrap();
    assert_eq!(support(&universal, &ds), 0.5);
    let absent = Fragment::from_graph(&graph(0, &[1, 1], &[(0, 1)])).unwrap();
    assert_eq!(support(&absent, &ds), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn containment_agrees_with_brute_force(seed in any::<u64>(), n in 3usize..8, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = random_graph(&mut rng, 0, n, 0.45, 2);
        let pattern = random_connected(&mut rng, 1, m, 1, 2);
        prop_assert_eq!(contains(&target, &pattern), brute_contains(&target, &pattern));
    }

    #[test]
    fn frequent_sets_shrink_as_theta_rises(seed in any::<u64>(), lo in 0.0f64..0.6, gap in 0.05f64..0.4) {
        let ds = random_dataset(seed, 5, 5, 2);
        let loose = mined(&ds, 3, lo);
        let strict = mined(&ds, 3, lo + gap);
        prop_assert!(strict.keys().all(|k| loose.contains_key(k)));
    }

    #[test]
    fn every_sub_fragment_of_a_frequent_fragment_is_frequent(seed in any::<u64>(), theta in 0.2f64..1.0) {
        let ds = random_dataset(seed, 5, 5, 2);
        let fragments = mined(&ds, 3, theta);
        for canon in fragments.keys() {
            let g = graph(0, &canon.0, &canon.1);
            for sub in connected_edge_subgraphs(&g, g.edge_count()) {
                prop_assert!(fragments.contains_key(&brute_canonical(&sub)));
            }
        }
    }

    #[test]
    fn decompositions_list_exactly_the_contained_fragments(seed in any::<u64>()) {
        let ds = random_dataset(seed, 5, 6, 3);
        let fragments = mine_frequent_fragments(&ds, &MiningConfig { theta: 0.4, max_edges: 3 }).unwrap();
        for g in &ds.graphs {
            let listed = decompose(g, &fragments).fragment_ids;
            let brute: Vec<usize> = (0..fragments.len())
                .filter(|&i| brute_contains(g, &fragments[i].fragment.to_graph()))
                .collect();
            prop_assert_eq!(listed, brute);
        }
    }
}
