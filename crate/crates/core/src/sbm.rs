//! Classic Bernoulli stochastic block model on a thresholded graph, fitted
//! by maximizing the profile likelihood (edge probabilities at their MLE
//! given the partition).

use crate::error::{Error, Result};
use crate::partition::{FitResult, ModelParams, Partition};
use crate::search::{self, bernoulli_term, AscentTrace, BlockAggregates, DenseWeights, PairLikelihood, SearchConfig};
use crate::simgraph::BinaryGraph;

pub const DEFAULT_MAX_SWEEPS: usize = 100;

struct Bernoulli;

impl PairLikelihood for Bernoulli {
    fn pair_term(&self, pairs: f64, edges: f64, _weight: f64) -> Option<f64> {
        Some(bernoulli_term(pairs, edges))
    }
}

fn dense(g: &BinaryGraph) -> DenseWeights {
    DenseWeights { n: g.n(), w: (0..g.n()).flat_map(|i| g.weight_row(i)).collect() }
}

fn check_len(g: &BinaryGraph, p: &Partition) -> Result<()> {
    if p.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), found: p.len() });
    }
    Ok(())
}

/// `sum over block pairs r <= s of m ln(m/N) + (N - m) ln(1 - m/N)`, where
/// `m` counts edges and `N` vertex pairs between the blocks.
pub fn sbm_log_likelihood(g: &BinaryGraph, p: &Partition) -> Result<f64> {
    check_len(g, p)?;
    search::profile_log_likelihood(&dense(g), p.labels(), p.k(), &Bernoulli)
}

/// Edge-probability MLEs; pairs of blocks with no vertex pairs get 0.
pub fn sbm_params(g: &BinaryGraph, p: &Partition) -> Result<Vec<Vec<f64>>> {
    check_len(g, p)?;
    let agg = BlockAggregates::compute(&dense(g), p.labels(), p.k());
    let k = p.k();
    Ok((0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let pairs = agg.pairs(r, s);
                    if pairs > 0.0 {
                        agg.edges[r * k + s] / pairs
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

fn finish(g: &BinaryGraph, partition: Partition, log_likelihood: f64, restarts: usize, seed: u64) -> Result<FitResult> {
    let theta = sbm_params(g, &partition)?;
    Ok(FitResult { partition, params: ModelParams::Sbm { theta }, log_likelihood, restarts_used: restarts, seed })
}

/// Greedy best-of-`restarts` maximization of [`sbm_log_likelihood`] over
/// partitions into at most `k` blocks. Deterministic for a fixed seed.
pub fn sbm_fit(g: &BinaryGraph, k: usize, restarts: usize, max_sweeps: usize, seed: u64) -> Result<FitResult> {
    let cfg = SearchConfig { k, restarts, max_sweeps, seed };
    let (partition, ll) = search::greedy_fit(&dense(g), &Bernoulli, cfg)?;
    finish(g, partition, ll, if k == 1 { 1 } else { restarts }, seed)
}

/// Accepted moves of one restart of [`sbm_fit`].
pub fn sbm_trace(g: &BinaryGraph, k: usize, max_sweeps: usize, seed: u64, restart: usize) -> Result<AscentTrace> {
    let cfg = SearchConfig { k, restarts: restart + 1, max_sweeps, seed };
    search::greedy_trace(&dense(g), &Bernoulli, cfg, restart)
}

/// Global maximizer by exhaustive enumeration; small graphs only.
pub fn brute_force_sbm(g: &BinaryGraph, k: usize) -> Result<FitResult> {
    let (partition, ll) = search::brute_force(&dense(g), &Bernoulli, k)?;
    finish(g, partition, ll, 0, 0)
}
