//! Clustering quality: silhouette, normalized mutual information and the
//! adjusted Rand index, with their intermediate quantities.
//!
//! Entropies use the natural logarithm.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::partition::{canonical_labels, Partition};
use crate::simgraph::SimilarityMetric;

/// Per-point silhouette components.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteDetail {
    /// Mean distance to the other members of the point's own cluster.
    pub a: Vec<f64>,
    /// Smallest mean distance to the members of another cluster.
    pub b: Vec<f64>,
    pub s: Vec<f64>,
    pub mean_s: f64,
}

/// Pairwise distance matrix, reusable across many silhouette evaluations
/// of the same data.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(ds: &Dataset, metric: SimilarityMetric) -> Self {
        let n = ds.n();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = metric.distance(ds.row(i), ds.row(j));
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { n, d }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Silhouette of `labels` over the precomputed distances. Points in
    /// singleton clusters score 0.
    pub fn silhouette(&self, labels: &[usize]) -> Result<SilhouetteDetail> {
        let n = self.n;
        if labels.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: labels.len() });
        }
        let (z, k) = canonical_labels(labels);
        if k < 2 {
            return Err(Error::UndefinedScore(k));
        }
        let mut sizes = vec![0usize; k];
        z.iter().for_each(|&c| sizes[c] += 1);

        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut sums = vec![0.0; k];
        for i in 0..n {
            sums.iter_mut().for_each(|v| *v = 0.0);
            let row = &self.d[i * n..(i + 1) * n];
            for (j, &dij) in row.iter().enumerate() {
                sums[z[j]] += dij;
            }
            let own = z[i];
            if sizes[own] > 1 {
                a[i] = sums[own] / (sizes[own] - 1) as f64;
            }
            b[i] = (0..k).filter(|&c| c != own).map(|c| sums[c] / sizes[c] as f64).fold(f64::INFINITY, f64::min);
            if sizes[own] > 1 {
                let denom = a[i].max(b[i]);
                s[i] = if denom > 0.0 { (b[i] - a[i]) / denom } else { 0.0 };
            }
        }
        let mean_s = s.iter().sum::<f64>() / n as f64;
        Ok(SilhouetteDetail { a, b, s, mean_s })
    }
}

/// Silhouette of a partition in feature space under `distance`.
pub fn silhouette(ds: &Dataset, p: &Partition, distance: SimilarityMetric) -> Result<SilhouetteDetail> {
    if p.len() != ds.n() {
        return Err(Error::LengthMismatch { expected: ds.n(), found: p.len() });
    }
    DistanceMatrix::new(ds, distance).silhouette(p.labels())
}

/// Contingency table: `table[r][s]` counts items with true label `r` and
/// predicted label `s`, after canonical relabeling of both vectors.
pub fn contingency(t: &[usize], c: &[usize]) -> Result<Vec<Vec<u64>>> {
    if t.len() != c.len() {
        return Err(Error::LengthMismatch { expected: t.len(), found: c.len() });
    }
    let (tz, tk) = canonical_labels(t);
    let (cz, ck) = canonical_labels(c);
    let mut table = vec![vec![0u64; ck]; tk];
    for (&r, &s) in tz.iter().zip(&cz) {
        table[r][s] += 1;
    }
    Ok(table)
}

/// Information-theoretic and pair-counting agreement between two labelings.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricBreakdown {
    pub mutual_information: f64,
    pub entropy_true: f64,
    pub entropy_pred: f64,
    /// `2 I / (H(T) + H(C))`.
    pub nmi: f64,
    /// `I / sqrt(H(T) H(C))`, the geometric normalization; diagnostic only.
    pub nmi_geometric: f64,
    /// Rand index: fraction of item pairs on which both labelings agree.
    pub ri: f64,
    pub expected_ri: f64,
    pub max_ri: f64,
    pub ari: f64,
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts.filter(|&c| c > 0).map(|c| c as f64 / n).map(|p| -p * p.ln()).sum()
}

fn choose2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Computes every field of [`MetricBreakdown`].
///
/// Degenerate conventions: NMI is 1 when both labelings have a single
/// cluster and 0 when only one of them does. ARI is 1 when its denominator
/// vanishes, which happens only for two identical single-cluster or
/// all-singleton labelings.
pub fn compare(t: &[usize], c: &[usize]) -> Result<MetricBreakdown> {
    let table = contingency(t, c)?;
    let n_items = t.len();
    if n_items == 0 {
        return Err(Error::Data("cannot compare empty labelings".into()));
    }
    let n = n_items as f64;
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..table[0].len()).map(|s| table.iter().map(|r| r[s]).sum()).collect();

    let h_t = entropy(row_sums.iter().copied(), n);
    let h_c = entropy(col_sums.iter().copied(), n);
    let mut mi = 0.0;
    for (r, row) in table.iter().enumerate() {
        for (s, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (row_sums[r] as f64 * col_sums[s] as f64)).ln();
            }
        }
    }
    // labelings equal up to renaming: score exactly 1 despite rounding
    let nonzero = |cells: &mut dyn Iterator<Item = u64>| cells.filter(|&x| x > 0).count();
    let equivalent = table.iter().all(|r| nonzero(&mut r.iter().copied()) <= 1)
        && (0..col_sums.len()).all(|s| nonzero(&mut table.iter().map(|r| r[s])) <= 1);
    let mi = if equivalent { h_t } else { mi.max(0.0) };
    let (nmi, nmi_geometric) = match (h_t > 0.0, h_c > 0.0) {
        (false, false) => (1.0, 1.0),
        _ if equivalent => (1.0, 1.0),
        (true, true) => ((2.0 * mi / (h_t + h_c)).min(1.0), (mi / (h_t * h_c).sqrt()).min(1.0)),
        _ => (0.0, 0.0),
    };

    let total_pairs = choose2(n_items as u64);
    let index: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_t: f64 = row_sums.iter().map(|&x| choose2(x)).sum();
    let sum_c: f64 = col_sums.iter().map(|&x| choose2(x)).sum();
    let expected = if total_pairs > 0.0 { sum_t * sum_c / total_pairs } else { 0.0 };
    let max_index = (sum_t + sum_c) / 2.0;
    let ari = if max_index - expected == 0.0 { 1.0 } else { (index - expected) / (max_index - expected) };
    // Rand-index scale: RI = 1 + (2 * index - sum_t - sum_c) / total_pairs
    let to_ri = |x: f64| if total_pairs > 0.0 { 1.0 + (2.0 * x - sum_t - sum_c) / total_pairs } else { 1.0 };

    Ok(MetricBreakdown {
        mutual_information: mi,
        entropy_true: h_t,
        entropy_pred: h_c,
        nmi,
        nmi_geometric,
        ri: to_ri(index),
        expected_ri: to_ri(expected),
        max_ri: to_ri(max_index),
        ari,
    })
}

/// NMI of predicted labels `c` against reference labels `t`.
pub fn nmi(t: &[usize], c: &[usize]) -> Result<MetricBreakdown> {
    compare(t, c)
}

/// Adjusted Rand index of `c` against `t`; requires at least two items.
pub fn ari(t: &[usize], c: &[usize]) -> Result<MetricBreakdown> {
    if t.len() == c.len() && t.len() < 2 {
        return Err(Error::Data("adjusted Rand index needs at least 2 items".into()));
    }
    compare(t, c)
}
