//! Weighted stochastic block model with exponentially distributed edge
//! weights, fitted on the complete similarity graph.
//!
//! The log-likelihood of a partition is the `alpha`-weighted combination
//!
//! ```text
//! (1 - alpha) * sum_{i<j, w_ij > 0} [ ln(rate_rs) - rate_rs * w_ij ]
//!     + alpha * (Bernoulli edge-existence log-likelihood)
//! ```
//!
//! with every block-pair rate at its MLE `edges_rs / weight_rs`. Summed over
//! a block pair, the weight term collapses to `m ln(m / W) - m`. On a
//! complete graph every block pair is saturated, so the existence term is
//! identically zero.

use crate::error::{Error, Result};
use crate::partition::{FitResult, ModelParams, Partition};
use crate::search::{self, bernoulli_term, AscentTrace, BlockAggregates, DenseWeights, PairLikelihood, SearchConfig};
use crate::simgraph::SimilarityGraph;

pub const DEFAULT_MAX_SWEEPS: usize = 100;
pub const DEFAULT_ALPHA: f64 = 0.0;

struct Exponential {
    alpha: f64,
}

impl PairLikelihood for Exponential {
    fn pair_term(&self, pairs: f64, edges: f64, weight: f64) -> Option<f64> {
        let weight_term = if edges == 0.0 {
            0.0
        } else {
            // the rate MLE overflows only for (sub)normal-range weight sums
            let rate = edges / weight;
            if !rate.is_finite() {
                return None;
            }
            edges * rate.ln() - edges
        };
        Some((1.0 - self.alpha) * weight_term + self.alpha * bernoulli_term(pairs, edges))
    }
}

fn model(alpha: f64) -> Result<Exponential> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(Exponential { alpha })
}

fn dense(g: &SimilarityGraph) -> DenseWeights {
    DenseWeights { n: g.n(), w: (0..g.n()).flat_map(|i| g.row(i).iter().copied()).collect() }
}

fn check_len(g: &SimilarityGraph, p: &Partition) -> Result<()> {
    if p.len() != g.n() {
        return Err(Error::LengthMismatch { expected: g.n(), found: p.len() });
    }
    Ok(())
}

pub fn wsbm_log_likelihood(g: &SimilarityGraph, p: &Partition, alpha: f64) -> Result<f64> {
    check_len(g, p)?;
    search::profile_log_likelihood(&dense(g), p.labels(), p.k(), &model(alpha)?)
}

/// Exponential rate MLE per block pair; pairs without edges get 0.
pub fn wsbm_rates(g: &SimilarityGraph, p: &Partition) -> Result<Vec<Vec<f64>>> {
    check_len(g, p)?;
    let k = p.k();
    let agg = BlockAggregates::compute(&dense(g), p.labels(), k);
    Ok((0..k)
        .map(|r| {
            (0..k)
                .map(|s| {
                    let e = agg.edges[r * k + s];
                    if e > 0.0 {
                        e / agg.weight[r * k + s]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect())
}

fn finish(
    g: &SimilarityGraph,
    partition: Partition,
    log_likelihood: f64,
    alpha: f64,
    restarts: usize,
    seed: u64,
) -> Result<FitResult> {
    let rates = wsbm_rates(g, &partition)?;
    Ok(FitResult {
        partition,
        params: ModelParams::Wsbm { rates, alpha },
        log_likelihood,
        restarts_used: restarts,
        seed,
    })
}

/// Greedy best-of-`restarts` maximization of [`wsbm_log_likelihood`].
/// Moves that would leave a block pair with an unbounded rate are skipped.
pub fn wsbm_fit(
    g: &SimilarityGraph,
    k: usize,
    alpha: f64,
    restarts: usize,
    max_sweeps: usize,
    seed: u64,
) -> Result<FitResult> {
    let m = model(alpha)?;
    let cfg = SearchConfig { k, restarts, max_sweeps, seed };
    let (partition, ll) = search::greedy_fit(&dense(g), &m, cfg)?;
    finish(g, partition, ll, alpha, if k == 1 { 1 } else { restarts }, seed)
}

/// Accepted moves of one restart of [`wsbm_fit`].
pub fn wsbm_trace(
    g: &SimilarityGraph,
    k: usize,
    alpha: f64,
    max_sweeps: usize,
    seed: u64,
    restart: usize,
) -> Result<AscentTrace> {
    let cfg = SearchConfig { k, restarts: restart + 1, max_sweeps, seed };
    search::greedy_trace(&dense(g), &model(alpha)?, cfg, restart)
}

/// Global maximizer by exhaustive enumeration; small graphs only.
pub fn brute_force_wsbm(g: &SimilarityGraph, k: usize, alpha: f64) -> Result<FitResult> {
    let (partition, ll) = search::brute_force(&dense(g), &model(alpha)?, k)?;
    finish(g, partition, ll, alpha, 0, 0)
}
