//! Reference clusterers: Lloyd's k-means with k-means++ seeding, and
//! agglomerative clustering with Ward linkage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::{canonical_labels, Partition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { restarts: 10, max_iters: 300, tol: 1e-4 }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Outcome of a single k-means run.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sse: f64,
    /// Within-cluster SSE after every assignment step.
    pub sse_history: Vec<f64>,
}

fn kmeans_pp(ds: &Dataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = ds.n();
    let mut centroids = vec![ds.row(rng.random_range(0..n)).to_vec()];
    let mut closest: Vec<f64> = ds.rows().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in closest.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            // fewer distinct points than clusters
            rng.random_range(0..n)
        };
        let c = ds.row(pick).to_vec();
        for (i, row) in ds.rows().enumerate() {
            closest[i] = closest[i].min(sq_dist(row, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(ds: &Dataset, centroids: &[Vec<f64>], labels: &mut [usize]) -> f64 {
    let mut sse = 0.0;
    for (i, row) in ds.rows().enumerate() {
        let (best, d) = centroids
            .iter()
            .enumerate()
            .map(|(c, cen)| (c, sq_dist(row, cen)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        labels[i] = best;
        sse += d;
    }
    sse
}

/// One Lloyd run from a k-means++ start. Empty clusters are reseeded with
/// the point farthest from its current centroid.
pub fn kmeans_single(ds: &Dataset, k: usize, max_iters: usize, tol: f64, rng: &mut ChaCha8Rng) -> KMeansRun {
    let (n, d) = (ds.n(), ds.d());
    let mut centroids = kmeans_pp(ds, k, rng);
    let mut labels = vec![0; n];
    let mut sse_history = Vec::new();
    for _ in 0..max_iters.max(1) {
        sse_history.push(assign(ds, &centroids, &mut labels));

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, row) in ds.rows().enumerate() {
            counts[labels[i]] += 1;
            sums[labels[i]].iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        let mut next: Vec<Vec<f64>> =
            sums.into_iter().zip(&counts).map(|(s, &c)| s.into_iter().map(|v| v / c.max(1) as f64).collect()).collect();
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(ds.row(a), &next[labels[a]]);
                        let db = sq_dist(ds.row(b), &next[labels[b]]);
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("n >= 2");
                counts[labels[far]] -= 1;
                labels[far] = c;
                counts[c] = 1;
                next[c] = ds.row(far).to_vec();
            }
        }
        let shift = centroids.iter().zip(&next).map(|(a, b)| sq_dist(a, b).sqrt()).fold(0.0, f64::max);
        centroids = next;
        if shift < tol {
            break;
        }
    }
    let sse = assign(ds, &centroids, &mut labels);
    sse_history.push(sse);
    KMeansRun { labels, centroids, sse, sse_history }
}

/// Best of `cfg.restarts` k-means runs by within-cluster SSE; earlier
/// restarts win ties.
pub fn kmeans_fit(ds: &Dataset, k: usize, cfg: KMeansConfig, seed: u64) -> Result<Partition> {
    if k < 2 || k > ds.n() {
        return Err(Error::Config(format!("k-means needs 2 <= K <= {}, got {k}", ds.n())));
    }
    if cfg.restarts == 0 {
        return Err(Error::Config("restarts must be >= 1".into()));
    }
    let mut best: Option<KMeansRun> = None;
    for r in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let run = kmeans_single(ds, k, cfg.max_iters, cfg.tol, &mut rng);
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    let (z, _) = canonical_labels(&best.expect("restarts >= 1").labels);
    Partition::new(z, k)
}

/// Merge history of Ward agglomeration, `n - 1` merges in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    /// `(a, b, cost)`: clusters stored in slots `a < b` merge into slot `a`.
    pub merges: Vec<(usize, usize, f64)>,
}

impl Dendrogram {
    /// Cuts the tree into `k` clusters by replaying the first `n - k` merges.
    pub fn cut(&self, k: usize) -> Result<Partition> {
        if k == 0 || k > self.n {
            return Err(Error::Config(format!("cannot cut {} points into {k} clusters", self.n)));
        }
        let mut slot: Vec<usize> = (0..self.n).collect();
        for &(a, b, _) in &self.merges[..self.n - k] {
            slot.iter_mut().filter(|s| **s == b).for_each(|s| *s = a);
        }
        let (z, _) = canonical_labels(&slot);
        Partition::new(z, k)
    }
}

/// Full Ward agglomeration via the Lance–Williams update on squared
/// Euclidean distances. Among equal merge costs the lexicographically
/// smallest slot pair is merged first.
pub fn ward_dendrogram(ds: &Dataset) -> Dendrogram {
    let n = ds.n();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = sq_dist(ds.row(i), ds.row(j));
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                let d = dist[i * n + j];
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let (a, b, dab) = best;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for c in (0..n).filter(|&c| active[c] && c != a && c != b) {
            let nc = size[c] as f64;
            let d = ((na + nc) * dist[a * n + c] + (nb + nc) * dist[b * n + c] - nc * dab) / (na + nb + nc);
            dist[a * n + c] = d;
            dist[c * n + a] = d;
        }
        size[a] += size[b];
        active[b] = false;
        merges.push((a, b, dab));
    }
    Dendrogram { n, merges }
}

/// Ward clustering cut at `k` clusters.
pub fn ward_fit(ds: &Dataset, k: usize) -> Result<Partition> {
    if k == 0 || k > ds.n() {
        return Err(Error::Config(format!("Ward needs 1 <= K <= {}, got {k}", ds.n())));
    }
    ward_dendrogram(ds).cut(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs_data() -> Dataset {
        Dataset::from_rows("pairs", vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![10.0, 10.0], vec![10.0, 10.1]], None)
            .unwrap()
    }

    #[test]
    fn kmeans_separable_pairs() {
        let p = kmeans_fit(&pairs_data(), 2, KMeansConfig::default(), 0).unwrap();
        assert_eq!(p.labels(), &[0, 0, 1, 1]);
    }

    #[test]
    fn kmeans_k_equals_n() {
        let ds = pairs_data();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let run = kmeans_single(&ds, 4, 300, 1e-4, &mut rng);
        assert_eq!(run.sse, 0.0);
        let p = kmeans_fit(&ds, 4, KMeansConfig::default(), 1).unwrap();
        assert_eq!(p.non_empty_blocks(), 4);
    }

    #[test]
    fn kmeans_sse_non_increasing() {
        let ds = crate::data::gen_ina(300, 5).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let run = kmeans_single(&ds, 6, 300, 0.0, &mut rng);
            assert!(run.sse_history.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{:?}", run.sse_history);
        }
    }

    #[test]
    fn kmeans_rejects_bad_k() {
        assert!(kmeans_fit(&pairs_data(), 1, KMeansConfig::default(), 0).is_err());
        assert!(kmeans_fit(&pairs_data(), 5, KMeansConfig::default(), 0).is_err());
    }

    #[test]
    fn kmeans_deterministic() {
        let ds = crate::data::gen_two_moons(100, 0.1, 3).unwrap();
        let a = kmeans_fit(&ds, 5, KMeansConfig::default(), 42).unwrap();
        let b = kmeans_fit(&ds, 5, KMeansConfig::default(), 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ward_identity_and_pairs() {
        let ds = Dataset::from_rows(
            "three",
            vec![vec![0.0], vec![0.2], vec![50.0], vec![50.3], vec![100.0], vec![100.1]],
            None,
        )
        .unwrap();
        assert_eq!(ward_fit(&ds, 6).unwrap().labels(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(ward_fit(&ds, 3).unwrap().labels(), &[0, 0, 1, 1, 2, 2]);
        let dendro = ward_dendrogram(&ds);
        let first: Vec<(usize, usize)> = dendro.merges[..3].iter().map(|&(a, b, _)| (a, b)).collect();
        assert_eq!(first, [(4, 5), (0, 1), (2, 3)]);
        assert!(ward_fit(&ds, 0).is_err());
        assert!(ward_fit(&ds, 7).is_err());
    }

    #[test]
    fn ward_merge_cost_is_variance_increase() {
        // merging singletons {0} and {2}: 2 * (1*1/2) * 4 = 4 (Lance-Williams scale)
        let ds = Dataset::from_rows("t", vec![vec![0.0], vec![2.0], vec![10.0]], None).unwrap();
        let dendro = ward_dendrogram(&ds);
        assert_eq!(dendro.merges[0], (0, 1, 4.0));
        // {0,1} (centroid 1) with {10}: 2 * (2*1/3) * 81 = 108
        assert!((dendro.merges[1].2 - 108.0).abs() < 1e-9);
    }

    #[test]
    fn ward_ties_break_to_smallest_pair() {
        let ds = Dataset::from_rows("t", vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]], None).unwrap();
        let dendro = ward_dendrogram(&ds);
        assert_eq!((dendro.merges[0].0, dendro.merges[0].1), (0, 1));
    }

    #[test]
    fn ward_cuts_are_nested() {
        let ds = crate::data::gen_circles(60, 0.1, 2).unwrap();
        let dendro = ward_dendrogram(&ds);
        for k in 1..20 {
            let coarse = dendro.cut(k).unwrap();
            let fine = dendro.cut(k + 1).unwrap();
            assert_eq!(coarse.non_empty_blocks(), k);
            assert_eq!(fine.non_empty_blocks(), k + 1);
            // every fine cluster lies inside one coarse cluster
            let mut parent = vec![None; k + 1];
            for (f, c) in fine.labels().iter().zip(coarse.labels()) {
                assert_eq!(*parent[*f].get_or_insert(*c), *c);
            }
        }
    }
}
