use std::sync::atomic::{AtomicUsize, Ordering};

use metricdist::embed::VectorSet;
use metricdist::metric::{build_support_set, embed_all, metric_vector, CacheKey, CloudDistance, DistanceCache, MetricVector};
use metricdist::ot::SinkhornConfig;
use metricdist::Result;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect()
}

fn euclid(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn key(scope: &str) -> CacheKey {
    CacheKey {
        dataset_hash: "abc".into(),
        min_sup: 0.9,
        max_edges: 5,
        dim: 16,
        epochs: 100,
        negatives: 5,
        lr_start: 0.025,
        lr_end: 1e-4,
        lambda: 1e-2,
        sinkhorn_iters: 30,
        marginal_tol: 1e-9,
        seed: 0,
        scope: scope.into(),
    }
}

#[test]
fn singleton_clouds_reproduce_hand_computed_vectors() {
    let pts = [[0.0, 0.0], [3.0, 4.0], [6.0, 0.0], [0.0, 8.0]];
    let labels = [0, 0, 1, 1];
    let clouds: Vec<VectorSet> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| VectorSet {
            graph_id: i,
            points: vec![p.to_vec()],
        })
        .collect();
    let distance = CloudDistance::new(&clouds, SinkhornConfig::default());
    let support = build_support_set(&[0, 1, 2, 3], &labels, 2).unwrap();
    for g in 0..4 {
        let raw: Vec<f64> = (0..4).map(|s| euclid(pts[g], pts[s])).collect();
        let total: f64 = raw.iter().sum();
        let got = metric_vector(g, &support, &distance).unwrap();
        assert!((got.normalizer - total).abs() < 1e-9);
        for (v, r) in got.values.iter().zip(&raw) {
            assert!((v - r / total).abs() < 1e-12);
        }
        assert!(got.values[g].abs() < 1e-12);
    }
}

#[test]
fn support_of_all_graphs_gives_the_row_normalized_distance_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pts = points(&mut rng, 9);
    let labels: Vec<usize> = (0..9).map(|i| i % 3).collect();
    let d = |a: usize, b: usize| -> Result<f64> { Ok(euclid(pts[a], pts[b])) };
    let all: Vec<usize> = (0..9).collect();
    let support = build_support_set(&all, &labels, 3).unwrap();
    let emb = embed_all(&all, &support, &d, &DistanceCache::new(9)).unwrap();
    for (g, row) in emb.rows.iter().enumerate() {
        let raw: Vec<f64> = support.ordered_ids.iter().map(|&s| euclid(pts[g], pts[s])).collect();
        let total: f64 = raw.iter().sum();
        for (v, r) in row.values.iter().zip(&raw) {
            assert!((v - r / total).abs() < 1e-12);
        }
    }
}

#[test]
fn warm_cache_needs_no_new_evaluations() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let pts = points(&mut rng, 12);
    let labels: Vec<usize> = (0..12).map(|i| i % 2).collect();
    let calls = AtomicUsize::new(0);
    let d = |a: usize, b: usize| -> Result<f64> {
        calls.fetch_add(1, Ordering::Relaxed);
        Ok(euclid(pts[a], pts[b]))
    };
    let ids: Vec<usize> = (0..12).collect();
    let support = build_support_set(&[0, 1, 2, 3, 4], &labels, 2).unwrap();
    let cache = DistanceCache::new(12);
    let first = embed_all(&ids, &support, &d, &cache).unwrap();
    let evals = calls.load(Ordering::Relaxed);
    assert!(evals <= ids.len() * support.len());
    assert_eq!(cache.evaluations(), evals);
    let second = embed_all(&ids, &support, &d, &cache).unwrap();
    assert_eq!(first, second);
    assert_eq!(calls.load(Ordering::Relaxed), evals);

    let dir = tempfile::tempdir().unwrap();
    cache.save(dir.path(), &key("all")).unwrap();
    let reloaded = DistanceCache::load_or_new(dir.path(), &key("all"), 12);
    assert!(reloaded.was_loaded());
    assert_eq!(embed_all(&ids, &support, &d, &reloaded).unwrap(), first);
    assert_eq!(reloaded.evaluations(), 0);
    let other = DistanceCache::load_or_new(dir.path(), &key("train:fold0"), 12);
    assert!(!other.was_loaded());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rows_are_stochastic_and_scale_free(seed in any::<u64>(), n in 4usize..14, c in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = points(&mut rng, n);
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut rng);
        let mut train: Vec<usize> = ids[..n / 2].iter().copied().chain([0, 1]).collect();
        train.sort_unstable();
        train.dedup();
        let support = build_support_set(&train, &labels, 2).unwrap();
        let d = |a: usize, b: usize| -> Result<f64> { Ok(euclid(pts[a], pts[b])) };
        let scaled = |a: usize, b: usize| -> Result<f64> { Ok(c * euclid(pts[a], pts[b])) };
        let all: Vec<usize> = (0..n).collect();
        let base = embed_all(&all, &support, &d, &DistanceCache::new(n)).unwrap();
        let big = embed_all(&all, &support, &scaled, &DistanceCache::new(n)).unwrap();
        for (r, s) in base.rows.iter().zip(&big.rows) {
            prop_assert!(r.values.iter().all(|&v| v >= 0.0));
            if !r.degenerate {
                prop_assert!((r.values.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
            for (a, b) in r.values.iter().zip(&s.values) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn permuting_a_class_block_permutes_its_entries(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 10;
        let pts = points(&mut rng, n);
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= 5)).collect();
        let support = build_support_set(&(0..n).collect::<Vec<_>>(), &labels, 2).unwrap();
        // relabel the support members of class 0 among themselves
        let mut perm: Vec<usize> = (0..n).collect();
        perm[..5].shuffle(&mut rng);
        let query = n;
        let probe = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let at = |i: usize| if i == query { probe } else { pts[i] };
        let plain = |a: usize, b: usize| -> Result<f64> { Ok(euclid(at(a), at(b))) };
        let moved = |a: usize, b: usize| -> Result<f64> {
            let m = |i: usize| if i == query { i } else { perm[i] };
            Ok(euclid(at(m(a)), at(m(b))))
        };
        let v1 = metric_vector(query, &support, &plain).unwrap();
        let v2 = metric_vector(query, &support, &moved).unwrap();
        for (s, &id) in support.ordered_ids.iter().enumerate() {
            let target = support.ordered_ids.iter().position(|&t| t == perm[id]).unwrap();
            prop_assert!((v2.values[s] - v1.values[target]).abs() <= 1e-12);
        }
        let sorted = |v: &[f64]| {
            let mut b = v.to_vec();
            b.sort_by(f64::total_cmp);
            b
        };
        for (a, b) in sorted(&v1.values[..5]).iter().zip(sorted(&v2.values[..5])) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn cache_entries_are_symmetric(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = points(&mut rng, n);
        let d = |a: usize, b: usize| -> Result<f64> { Ok(euclid(pts[a], pts[b])) };
        let cache = DistanceCache::new(n);
        let pairs: Vec<(usize, usize)> = (0..3 * n).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        cache.ensure(&pairs, &d).unwrap();
        for &(a, b) in &pairs {
            prop_assert_eq!(cache.get(a, b), cache.get(b, a));
            prop_assert!(cache.get(a, b).is_some());
        }
        let distinct: std::collections::BTreeSet<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        prop_assert_eq!(cache.evaluations(), distinct.len());
    }

    #[test]
    fn all_zero_rows_become_uniform(n in 1usize..20) {
        let v = MetricVector::from_distances(0, vec![0.0; n]);
        prop_assert!(v.degenerate);
        prop_assert!(v.values.iter().all(|&x| (x - 1.0 / n as f64).abs() < 1e-15));
    }
}
