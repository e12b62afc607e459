//! Library results checked against direct, definition-level evaluations.

#![allow(clippy::needless_range_loop)]

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbmclust::eval;
use sbmclust::sbm::{brute_force_sbm, sbm_log_likelihood, sbm_params};
use sbmclust::simgraph::{apply_threshold, induce_graph, similarity};
use sbmclust::wsbm::{brute_force_wsbm, wsbm_log_likelihood, wsbm_rates};
use sbmclust::{BinaryGraph, Dataset, Partition, SimilarityGraph, SimilarityMetric};

fn ln_or_zero(count: f64, p: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        p.ln()
    }
}

/// Sum over vertex pairs of the log-probability of the observed edge state.
fn sbm_pairwise(g: &BinaryGraph, p: &Partition) -> f64 {
    let theta = sbm_params(g, p).unwrap();
    let z = p.labels();
    let mut ll = 0.0;
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            let t = theta[z[i]][z[j]];
            ll += if g.has_edge(i, j) { ln_or_zero(1.0, t) } else { ln_or_zero(1.0, 1.0 - t) };
        }
    }
    ll
}

/// Sum over edges of the exponential log-density, plus the existence term.
fn wsbm_pairwise(g: &SimilarityGraph, p: &Partition, alpha: f64) -> f64 {
    let rates = wsbm_rates(g, p).unwrap();
    let z = p.labels();
    let k = p.k();
    let (mut pairs, mut edges) = (vec![vec![0.0; k]; k], vec![vec![0.0; k]; k]);
    let mut density = 0.0;
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            let (r, s) = (z[i].min(z[j]), z[i].max(z[j]));
            pairs[r][s] += 1.0;
            let w = g.weight(i, j);
            if w > 0.0 {
                edges[r][s] += 1.0;
                let rate = rates[r][s];
                density += rate.ln() - rate * w;
            }
        }
    }
    let mut existence = 0.0;
    for r in 0..k {
        for s in 0..k {
            let (n, m) = (pairs[r][s], edges[r][s]);
            if n > 0.0 {
                let q = m / n;
                existence += m * ln_or_zero(m, q) + (n - m) * ln_or_zero(n - m, 1.0 - q);
            }
        }
    }
    (1.0 - alpha) * density + alpha * existence
}

fn random_binary(n: usize, p: f64, rng: &mut ChaCha8Rng) -> BinaryGraph {
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.random::<f64>() < p).collect();
    BinaryGraph::from_edges(n, &edges).unwrap()
}

fn random_weighted(n: usize, sparsity: f64, rng: &mut ChaCha8Rng) -> SimilarityGraph {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() >= sparsity {
                let x = rng.random_range(0.01..2.0);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
    }
    SimilarityGraph::from_matrix(w, SimilarityMetric::Euclidean).unwrap()
}

fn random_partition(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Partition {
    Partition::new((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap()
}

#[test]
fn sbm_likelihood_matches_pairwise_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(2..=12);
        let g = random_binary(n, rng.random_range(0.0..1.0), &mut rng);
        let p = random_partition(n, rng.random_range(1..=4), &mut rng);
        assert_relative_eq!(sbm_log_likelihood(&g, &p).unwrap(), sbm_pairwise(&g, &p), epsilon = 1e-9);
    }
}

#[test]
fn wsbm_likelihood_matches_per_edge_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let n = rng.random_range(2..=12);
        let g = random_weighted(n, rng.random_range(0.0..0.5), &mut rng);
        let p = random_partition(n, rng.random_range(1..=4), &mut rng);
        let alpha = [0.0, 0.3, 1.0][rng.random_range(0..3)];
        let ll = wsbm_log_likelihood(&g, &p, alpha).unwrap();
        assert_relative_eq!(ll, wsbm_pairwise(&g, &p, alpha), epsilon = 1e-9, max_relative = 1e-12);
    }
}

#[test]
fn brute_force_is_the_argmax_of_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let n = 6;
        let bg = random_binary(n, 0.5, &mut rng);
        let wg = random_weighted(n, 0.0, &mut rng);
        let sbm = brute_force_sbm(&bg, 2).unwrap();
        let wsbm = brute_force_wsbm(&wg, 2, 0.0).unwrap();
        for mask in 0u32..(1 << n) {
            let p = Partition::new((0..n).map(|i| ((mask >> i) & 1) as usize).collect(), 2).unwrap();
            assert!(sbm_pairwise(&bg, &p) <= sbm.log_likelihood + 1e-9);
            assert!(wsbm_pairwise(&wg, &p, 0.0) <= wsbm.log_likelihood + 1e-9);
        }
    }
}

/// Silhouette straight from its definition, without a cached distance matrix.
fn silhouette_oracle(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..points.len() {
        let mean_to = |c: usize| {
            let others: Vec<usize> = (0..points.len()).filter(|&j| j != i && labels[j] == c).collect();
            others.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / others.len() as f64
        };
        if labels.iter().filter(|&&l| l == labels[i]).count() == 1 {
            continue;
        }
        let a = mean_to(labels[i]);
        let b = (0..k).filter(|&c| c != labels[i] && labels.contains(&c)).map(mean_to).fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / points.len() as f64
}

#[test]
fn silhouette_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let n = rng.random_range(3..=15);
        let points: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let p = Partition::from_labels(&labels);
        let ds = Dataset::from_rows("random", points.clone(), None).unwrap();
        let got = eval::silhouette(&ds, &p, SimilarityMetric::Euclidean).unwrap().mean_s;
        assert_relative_eq!(got, silhouette_oracle(&points, p.labels()), epsilon = 1e-12);
    }
}

#[test]
fn thresholded_iris_matches_naive_filter() {
    let iris = sbmclust::data::iris();
    let g = induce_graph(&iris, SimilarityMetric::Chebyshev).unwrap();
    let b = apply_threshold(&g, 0.5).unwrap();
    let mut count = 0;
    for i in 0..iris.n() {
        for j in i + 1..iris.n() {
            let s = similarity(iris.row(i), iris.row(j), SimilarityMetric::Chebyshev).unwrap();
            assert_eq!(b.has_edge(i, j), s >= 0.5);
            count += usize::from(s >= 0.5);
        }
    }
    assert_eq!(b.edge_count(), count);
}

fn vector(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

fn labels_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2usize..40).prop_flat_map(|n| (prop::collection::vec(0usize..4, n), prop::collection::vec(0usize..5, n)))
}

proptest! {
    #[test]
    fn similarity_is_bounded_symmetric_and_ordered((x, y) in (1usize..8).prop_flat_map(|d| (vector(d), vector(d)))) {
        use SimilarityMetric::{Chebyshev, Euclidean, Manhattan};
        for m in SimilarityMetric::ALL {
            let s = similarity(&x, &y, m).unwrap();
            prop_assert!(s > 0.0 || s == 0.0 && m.distance(&x, &y) > 700.0);
            prop_assert!(s <= 1.0);
            prop_assert_eq!(s, similarity(&y, &x, m).unwrap());
            prop_assert_eq!(similarity(&x, &x, m).unwrap(), 1.0);
        }
        let (c, e, m) = (
            similarity(&x, &y, Chebyshev).unwrap(),
            similarity(&x, &y, Euclidean).unwrap(),
            similarity(&x, &y, Manhattan).unwrap(),
        );
        prop_assert!(c >= e && e >= m);
    }

    #[test]
    fn nmi_and_ari_are_symmetric_and_bounded((t, c) in labels_pair()) {
        let a = eval::compare(&t, &c).unwrap();
        let b = eval::compare(&c, &t).unwrap();
        prop_assert!((a.nmi - b.nmi).abs() < 1e-12);
        prop_assert!((a.ari - b.ari).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.nmi));
        prop_assert!(a.ari <= 1.0 + 1e-12);
    }

    #[test]
    fn scores_ignore_label_names((t, c) in labels_pair(), shift in 1usize..7) {
        let renamed: Vec<usize> = c.iter().map(|&x| (x * 3 + shift) % 17).collect();
        let a = eval::compare(&t, &c).unwrap();
        let b = eval::compare(&t, &renamed).unwrap();
        prop_assert!((a.nmi - b.nmi).abs() < 1e-12);
        prop_assert!((a.ari - b.ari).abs() < 1e-12);
    }
}
