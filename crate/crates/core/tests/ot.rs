mod common;

use metricdist::embed::VectorSet;
use metricdist::ot::{
    cost_matrix, decode_matrix, encode_matrix, exact_ot_small, graph_distance, sinkhorn, wasserstein2_1d,
    DiscreteDistribution, Matrix, SinkhornConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tight(lambda: f64) -> SinkhornConfig {
    SinkhornConfig {
        lambda,
        max_iters: 1000,
        marginal_tol: 1e-9,
    }
}

fn random_cost(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    Matrix::from_vec(m, n, (0..m * n).map(|_| rng.random::<f64>()).collect())
}

fn random_cloud(rng: &mut ChaCha8Rng, id: usize, len: usize, dim: usize) -> VectorSet {
    VectorSet {
        graph_id: id,
        points: (0..len).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
    }
}

/// Mean assignment cost minimized over all permutations.
fn permutation_oracle(cost: &Matrix) -> f64 {
    let n = cost.rows();
    common::permutations(n)
        .iter()
        .map(|p| (0..n).map(|i| cost[(i, p[i])]).sum::<f64>() / n as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Squared 1-D W2 by replicating every point of `a` |b| times and every point
/// of `b` |a| times, then matching the sorted copies.
fn replicated_w2_squared(a: &[f64], b: &[f64]) -> f64 {
    let mut ra: Vec<f64> = a.iter().flat_map(|&x| std::iter::repeat_n(x, b.len())).collect();
    let mut rb: Vec<f64> = b.iter().flat_map(|&x| std::iter::repeat_n(x, a.len())).collect();
    ra.sort_by(f64::total_cmp);
    rb.sort_by(f64::total_cmp);
    ra.iter().zip(&rb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / ra.len() as f64
}

fn scalar_cost(a: &[f64], b: &[f64]) -> Matrix {
    Matrix::from_vec(
        a.len(),
        b.len(),
        a.iter().flat_map(|x| b.iter().map(move |y| (x - y) * (x - y))).collect(),
    )
}

#[test]
fn exact_square_uniform_matches_permutation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=6 {
        for _ in 0..10 {
            let cost = random_cost(&mut rng, n, n);
            let u = DiscreteDistribution::uniform(n);
            let exact = exact_ot_small(&cost, &u, &u).unwrap();
            assert!((exact - permutation_oracle(&cost)).abs() < 1e-12);
        }
    }
}

#[test]
fn sinkhorn_approaches_exact_on_random_three_by_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = DiscreteDistribution::uniform(3);
    for _ in 0..50 {
        let cost = random_cost(&mut rng, 3, 3);
        let plan = sinkhorn(&cost, &u, &u, &tight(1e-3)).unwrap();
        let exact = permutation_oracle(&cost);
        assert!((plan.transport_cost - exact).abs() <= 0.02 * exact, "{} vs {exact}", plan.transport_cost);
    }
}

#[test]
fn identical_clouds_cost_almost_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cloud = random_cloud(&mut rng, 0, 5, 4);
    let cost = cost_matrix(&cloud, &cloud).unwrap();
    let off: Vec<f64> = (0..5).flat_map(|i| (0..5).filter(move |&j| j != i).map(move |j| (i, j))).map(|ij| cost[ij]).collect();
    let mean_off = off.iter().sum::<f64>() / off.len() as f64;
    let u = DiscreteDistribution::uniform(5);
    let plan = sinkhorn(&cost, &u, &u, &tight(1e-3)).unwrap();
    assert!(plan.transport_cost <= 1e-2 * mean_off);
}

#[test]
fn cloud_distance_tracks_exact_transport() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = DiscreteDistribution::uniform(3);
    for _ in 0..20 {
        let a = random_cloud(&mut rng, 0, 3, 2);
        let b = random_cloud(&mut rng, 1, 3, 2);
        let exact = exact_ot_small(&cost_matrix(&a, &b).unwrap(), &u, &u).unwrap().sqrt();
        let d = graph_distance(&a, &b, &tight(1e-3)).unwrap();
        assert!((d - exact).abs() <= 0.02 * exact);
    }
}

#[test]
fn one_dimensional_examples_against_replication_oracle() {
    assert!((wasserstein2_1d(&[0.0, 1.0], &[0.0, 1.0, 2.0]) - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((replicated_w2_squared(&[0.0, 1.0], &[0.0, 1.0, 2.0]) - 0.5).abs() < 1e-15);
    assert_eq!(wasserstein2_1d(&[0.0], &[1.0]), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sinkhorn_never_beats_the_optimum(seed in any::<u64>(), m in 1usize..=6, n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost = random_cost(&mut rng, m, n);
        let (mu, nu) = (DiscreteDistribution::uniform(m), DiscreteDistribution::uniform(n));
        let plan = sinkhorn(&cost, &mu, &nu, &tight(1e-2)).unwrap();
        prop_assume!(plan.marginal_error <= 1e-6);
        prop_assert!(plan.transport_cost >= exact_ot_small(&cost, &mu, &nu).unwrap() - 1e-6);
        prop_assert!(plan.matrix.as_slice().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn smaller_lambda_never_costs_more(seed in any::<u64>(), m in 1usize..=5, n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost = random_cost(&mut rng, m, n);
        let (mu, nu) = (DiscreteDistribution::uniform(m), DiscreteDistribution::uniform(n));
        let coarse = sinkhorn(&cost, &mu, &nu, &tight(1e-1)).unwrap();
        let fine = sinkhorn(&cost, &mu, &nu, &tight(1e-3)).unwrap();
        prop_assert!(coarse.transport_cost >= fine.transport_cost - 1e-9);
    }

    #[test]
    fn graph_distance_is_symmetric_and_nonnegative(seed in any::<u64>(), m in 1usize..6, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cloud(&mut rng, 0, m, 3);
        let b = random_cloud(&mut rng, 1, n, 3);
        let config = SinkhornConfig::default();
        let ab = graph_distance(&a, &b, &config).unwrap();
        let ba = graph_distance(&b, &a, &config).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9);
    }

    #[test]
    fn cost_matrix_matches_elementwise_recomputation(seed in any::<u64>(), m in 1usize..5, n in 1usize..5, dim in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_cloud(&mut rng, 0, m, dim);
        let b = random_cloud(&mut rng, 1, n, dim);
        let c = cost_matrix(&a, &b).unwrap();
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..dim {
                    s += (a.points[i][k] - b.points[j][k]).powi(2);
                }
                prop_assert!((c[(i, j)] - s).abs() < 1e-14);
            }
        }
        let self_cost = cost_matrix(&a, &a).unwrap();
        for i in 0..m {
            prop_assert_eq!(self_cost[(i, i)], 0.0);
        }
    }

    #[test]
    fn one_dimensional_w2_matches_exact_transport(
        a in prop::collection::vec(-5.0f64..5.0, 1..=8),
        b in prop::collection::vec(-5.0f64..5.0, 1..=8),
    ) {
        let w = wasserstein2_1d(&a, &b);
        let exact = exact_ot_small(
            &scalar_cost(&a, &b),
            &DiscreteDistribution::uniform(a.len()),
            &DiscreteDistribution::uniform(b.len()),
        ).unwrap();
        prop_assert!((w - exact.max(0.0).sqrt()).abs() <= 1e-9);
        prop_assert!((w * w - replicated_w2_squared(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn matrix_bytes_round_trip(seed in any::<u64>(), m in 0usize..6, n in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = random_cost(&mut rng, m, n);
        prop_assert_eq!(decode_matrix(&encode_matrix(&matrix)).unwrap(), matrix);
    }
}
