//! Complete similarity graphs induced from feature vectors, and their
//! thresholded unweighted counterparts.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Distance whose negative exponential defines the edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SimilarityMetric {
    Chebyshev,
    #[default]
    Manhattan,
    Euclidean,
}

impl SimilarityMetric {
    pub const ALL: [SimilarityMetric; 3] =
        [SimilarityMetric::Manhattan, SimilarityMetric::Euclidean, SimilarityMetric::Chebyshev];

    /// The underlying distance. Callers guarantee equal lengths.
    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            SimilarityMetric::Chebyshev => diffs.fold(0.0, f64::max),
            SimilarityMetric::Manhattan => diffs.sum(),
            SimilarityMetric::Euclidean => diffs.map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

impl FromStr for SimilarityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chebyshev" => Ok(SimilarityMetric::Chebyshev),
            "manhattan" => Ok(SimilarityMetric::Manhattan),
            "euclidean" => Ok(SimilarityMetric::Euclidean),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

impl fmt::Display for SimilarityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityMetric::Chebyshev => "chebyshev",
            SimilarityMetric::Manhattan => "manhattan",
            SimilarityMetric::Euclidean => "euclidean",
        })
    }
}

/// `exp(-distance(x, y))`, a similarity in `(0, 1]`.
pub fn similarity(x: &[f64], y: &[f64], metric: SimilarityMetric) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), found: y.len() });
    }
    if x.is_empty() {
        return Err(Error::Data("similarity of empty vectors".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Data("similarity of non-finite vectors".into()));
    }
    Ok((-metric.distance(x, y)).exp())
}

/// Dense weighted graph on `n` vertices. Off-diagonal weights lie in
/// `(0, 1]` and the diagonal is zero.
///
/// Very distant points can underflow to a weight of exactly zero; such pairs
/// behave as missing edges downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    weights: Vec<f64>,
    pub metric: SimilarityMetric,
}

impl SimilarityGraph {
    /// Builds a graph from an explicit symmetric weight matrix. The diagonal
    /// is forced to zero; off-diagonal weights must be finite and >= 0.
    pub fn from_matrix(weights: Vec<Vec<f64>>, metric: SimilarityMetric) -> Result<Self> {
        let n = weights.len();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: row.len() });
            }
            for (j, &w) in row.iter().enumerate() {
                if i == j {
                    flat.push(0.0);
                    continue;
                }
                if !(w.is_finite() && w >= 0.0) || w != weights[j][i] {
                    return Err(Error::Data(format!("weight ({i}, {j}) must be finite, >= 0 and symmetric")));
                }
                flat.push(w);
            }
        }
        Ok(Self { n, weights: flat, metric })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// Writes `i,j,weight` lines for every `i < j`, with 0-based ids.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,weight")?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                writeln!(out, "{i},{j},{}", self.weight(i, j))?;
            }
        }
        Ok(())
    }
}

/// Induces the complete similarity graph of a data set.
pub fn induce_graph(ds: &Dataset, metric: SimilarityMetric) -> Result<SimilarityGraph> {
    let n = ds.n();
    if n < 2 {
        return Err(Error::Data("graph induction needs at least 2 points".into()));
    }
    // rows are validated finite and equally long by Dataset
    let weights: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xi = ds.row(i);
            (0..n).map(move |j| if i == j { 0.0 } else { (-metric.distance(xi, ds.row(j))).exp() })
        })
        .collect();
    Ok(SimilarityGraph { n, weights, metric })
}

/// Unweighted simple graph produced by a global weight threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryGraph {
    n: usize,
    adjacency: Vec<bool>,
    pub threshold: f64,
}

impl BinaryGraph {
    /// Builds a graph from an undirected edge list; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::Data(format!("invalid edge ({i}, {j}) for {n} vertices")));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        Ok(Self { n, adjacency, threshold: f64::NAN })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a).count() / 2
    }

    /// Edge indicator as a 0/1 weight matrix row, for the shared block search.
    pub(crate) fn weight_row(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.adjacency[i * self.n..(i + 1) * self.n].iter().map(|&a| if a { 1.0 } else { 0.0 })
    }
}

/// Keeps exactly the edges with weight `>= t`. Every vertex is retained.
pub fn apply_threshold(g: &SimilarityGraph, t: f64) -> Result<BinaryGraph> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Config(format!("threshold must lie in (0, 1), got {t}")));
    }
    let n = g.n;
    let adjacency = g.weights.iter().enumerate().map(|(k, &w)| k / n != k % n && w >= t).collect();
    Ok(BinaryGraph { n, adjacency, threshold: t })
}

/// Arithmetic grid `lo, lo + step, ...` up to and including `hi`.
///
/// Grid points are computed as `lo + i * step` and rounded to 12 decimals so
/// that e.g. `(0.1, 0.3, 0.1)` yields exactly `[0.1, 0.2, 0.3]`.
pub fn threshold_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo <= hi && hi < 1.0 && step > 0.0) {
        return Err(Error::Config(format!("invalid threshold grid lo={lo} hi={hi} step={step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}
