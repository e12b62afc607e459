//! Profile-likelihood machinery shared by the Bernoulli and weighted block
//! models: block-pair sufficient statistics, greedy single-node relabeling
//! with random restarts, and exhaustive enumeration for small graphs.
//!
//! Both models see the graph as a dense symmetric weight matrix. A pair
//! `(i, j)` carries an edge iff its weight is positive. For every unordered
//! block pair `(r, s)` the search tracks the number of vertex pairs, the
//! number of edges and the total edge weight; a model only has to say how
//! one block pair contributes to the log-likelihood.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::{canonical_labels, Partition};

/// Moves must improve the likelihood by more than this to be accepted.
pub const MIN_IMPROVEMENT: f64 = 1e-9;

/// Incremental weight updates that shrink a block-pair weight below this
/// fraction of the magnitudes involved are recomputed exactly.
const CANCELLATION_RATIO: f64 = 1e-6;

/// Upper bound on the number of partitions enumerated exhaustively.
pub const MAX_ENUMERATION: u128 = 1_000_000;

/// Log-likelihood contribution of a single block pair given its profile
/// statistics. `None` marks a block pair whose parameter MLE is undefined.
pub trait PairLikelihood: Sync {
    fn pair_term(&self, pairs: f64, edges: f64, weight: f64) -> Option<f64>;
}

/// `x * ln(y)` with the `0 * ln 0 = 0` convention.
pub(crate) fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Bernoulli profile term `m ln p + (N - m) ln(1 - p)` at `p = m / N`.
pub(crate) fn bernoulli_term(pairs: f64, edges: f64) -> f64 {
    if pairs == 0.0 {
        return 0.0;
    }
    let p = edges / pairs;
    xlogy(edges, p) + xlogy(pairs - edges, 1.0 - p)
}

/// Dense symmetric weight matrix with zero diagonal.
#[derive(Debug, Clone)]
pub(crate) struct DenseWeights {
    pub n: usize,
    pub w: Vec<f64>,
}

impl DenseWeights {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }
}

fn pair_count(sizes: &[usize], r: usize, s: usize) -> f64 {
    let (a, b) = (sizes[r] as f64, sizes[s] as f64);
    if r == s {
        a * (a - 1.0) / 2.0
    } else {
        a * b
    }
}

/// Edge counts and weight sums per unordered block pair, stored as full
/// symmetric `k x k` matrices.
#[derive(Debug, Clone)]
pub(crate) struct BlockAggregates {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub edges: Vec<f64>,
    pub weight: Vec<f64>,
}

impl BlockAggregates {
    pub fn compute(g: &DenseWeights, z: &[usize], k: usize) -> Self {
        let mut agg = Self { k, sizes: vec![0; k], edges: vec![0.0; k * k], weight: vec![0.0; k * k] };
        z.iter().for_each(|&b| agg.sizes[b] += 1);
        for i in 0..g.n {
            for j in i + 1..g.n {
                let w = g.get(i, j);
                if w > 0.0 {
                    let (r, s) = (z[i], z[j]);
                    agg.edges[r * k + s] += 1.0;
                    agg.weight[r * k + s] += w;
                    if r != s {
                        agg.edges[s * k + r] += 1.0;
                        agg.weight[s * k + r] += w;
                    }
                }
            }
        }
        agg
    }

    pub fn pairs(&self, r: usize, s: usize) -> f64 {
        pair_count(&self.sizes, r, s)
    }

    pub fn log_likelihood<L: PairLikelihood + ?Sized>(&self, model: &L) -> Result<f64> {
        let k = self.k;
        let mut total = 0.0;
        for r in 0..k {
            for s in r..k {
                total += model
                    .pair_term(self.pairs(r, s), self.edges[r * k + s], self.weight[r * k + s])
                    .ok_or(Error::DegenerateBlock(r, s))?;
            }
        }
        Ok(total)
    }
}

/// Profile log-likelihood of `z` computed from scratch.
pub(crate) fn profile_log_likelihood<L: PairLikelihood + ?Sized>(
    g: &DenseWeights,
    z: &[usize],
    k: usize,
    model: &L,
) -> Result<f64> {
    if z.len() != g.n {
        return Err(Error::LengthMismatch { expected: g.n, found: z.len() });
    }
    BlockAggregates::compute(g, z, k).log_likelihood(model)
}

/// One accepted relabeling during greedy ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub node: usize,
    pub from: usize,
    pub to: usize,
    /// Likelihood gain as computed incrementally by the search.
    pub gain: f64,
}

/// Record of a single greedy ascent, for replay and inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentTrace {
    pub initial: Partition,
    pub moves: Vec<Move>,
    pub sweeps: usize,
}

/// Incrementally maintained search state for one restart.
struct SearchState<'a, L: PairLikelihood + ?Sized> {
    g: &'a DenseWeights,
    model: &'a L,
    z: Vec<usize>,
    agg: BlockAggregates,
    /// Cached pair terms; `-inf` marks a degenerate block pair.
    terms: Vec<f64>,
    /// `node_edges[i * k + t]`: edges from node `i` into block `t`.
    node_edges: Vec<f64>,
    node_weight: Vec<f64>,
}

impl<'a, L: PairLikelihood + ?Sized> SearchState<'a, L> {
    fn new(g: &'a DenseWeights, model: &'a L, z: Vec<usize>, k: usize) -> Self {
        let mut state = Self {
            g,
            model,
            agg: BlockAggregates::compute(g, &z, k),
            z,
            terms: vec![0.0; k * k],
            node_edges: vec![0.0; g.n * k],
            node_weight: vec![0.0; g.n * k],
        };
        state.rebuild();
        state
    }

    /// Recomputes every aggregate from scratch, dropping accumulated
    /// floating point drift.
    fn rebuild(&mut self) {
        let (n, k) = (self.g.n, self.agg.k);
        self.agg = BlockAggregates::compute(self.g, &self.z, k);
        self.node_edges.iter_mut().for_each(|v| *v = 0.0);
        self.node_weight.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            for j in 0..n {
                let w = self.g.get(i, j);
                if w > 0.0 {
                    self.node_edges[i * k + self.z[j]] += 1.0;
                    self.node_weight[i * k + self.z[j]] += w;
                }
            }
        }
        for r in 0..k {
            for s in r..k {
                self.refresh_term(r, s);
            }
        }
    }

    fn refresh_term(&mut self, r: usize, s: usize) {
        let k = self.agg.k;
        let t = self
            .model
            .pair_term(self.agg.pairs(r, s), self.agg.edges[r * k + s], self.agg.weight[r * k + s])
            .unwrap_or(f64::NEG_INFINITY);
        self.terms[r * k + s] = t;
        self.terms[s * k + r] = t;
    }

    /// Change of the edge count and weight of block pair `(a, b)` when node
    /// `i` moves from its block to `to`. Returns `(d_edges, d_weight,
    /// magnitude)`, where `magnitude` bounds the absolute size of the
    /// weight terms involved, for cancellation checks.
    fn pair_delta(&self, i: usize, to: usize, a: usize, b: usize) -> (f64, f64, f64) {
        let k = self.agg.k;
        let from = self.z[i];
        let ke = &self.node_edges[i * k..(i + 1) * k];
        let kw = &self.node_weight[i * k..(i + 1) * k];
        let (a, b) = if a == to && b == from { (from, to) } else { (a, b) };
        let (de, dw, mag) = if a == from && b == from {
            (-ke[from], -kw[from], kw[from])
        } else if a == to && b == to {
            (ke[to], kw[to], kw[to])
        } else if a == from && b == to {
            (ke[from] - ke[to], kw[from] - kw[to], kw[from] + kw[to])
        } else if a == from {
            (-ke[b], -kw[b], kw[b])
        } else if a == to {
            (ke[b], kw[b], kw[b])
        } else {
            (0.0, 0.0, 0.0)
        };
        (de, dw, mag + self.agg.weight[a * k + b])
    }

    /// Exact weight of block pair `(a, b)` under labels `z` with node `i`
    /// relabeled to `to`.
    fn exact_weight(&self, z: &[usize], moved: Option<(usize, usize)>, a: usize, b: usize) -> f64 {
        let block = |j: usize| match moved {
            Some((i, to)) if i == j => to,
            _ => z[j],
        };
        let members_a: Vec<usize> = (0..self.g.n).filter(|&j| block(j) == a).collect();
        let mut total = 0.0;
        if a == b {
            for (x, &j) in members_a.iter().enumerate() {
                total += members_a[x + 1..].iter().map(|&l| self.g.get(j, l)).sum::<f64>();
            }
        } else {
            let members_b: Vec<usize> = (0..self.g.n).filter(|&j| block(j) == b).collect();
            for &j in &members_a {
                total += members_b.iter().map(|&l| self.g.get(j, l)).sum::<f64>();
            }
        }
        total
    }

    /// New weight of a block pair, recomputed exactly when the incremental
    /// update cancels most of the magnitude involved.
    fn updated_weight(&self, old: f64, dw: f64, mag: f64, edges: f64, exact: impl FnOnce() -> f64) -> f64 {
        let w = old + dw;
        if edges > 0.0 && w < CANCELLATION_RATIO * mag {
            exact()
        } else {
            w.max(0.0)
        }
    }

    /// Term of block pair `(a, b)` after moving node `i` into `to`.
    fn term_after(&self, i: usize, to: usize, a: usize, b: usize) -> Option<f64> {
        let k = self.agg.k;
        let from = self.z[i];
        let size_after = |x: usize| {
            let s = self.agg.sizes[x] as f64;
            if x == from {
                s - 1.0
            } else if x == to {
                s + 1.0
            } else {
                s
            }
        };
        let pairs = if a == b { size_after(a) * (size_after(a) - 1.0) / 2.0 } else { size_after(a) * size_after(b) };
        let (de, dw, mag) = self.pair_delta(i, to, a, b);
        let e = (self.agg.edges[a * k + b] + de).max(0.0);
        let w = self
            .updated_weight(self.agg.weight[a * k + b], dw, mag, e, || self.exact_weight(&self.z, Some((i, to)), a, b));
        self.model.pair_term(pairs, e, w)
    }

    /// Likelihood change from moving node `i` into block `to`, or `None`
    /// when the move would create a degenerate block pair.
    #[cfg(test)]
    fn move_gain(&self, i: usize, to: usize) -> Option<f64> {
        let k = self.agg.k;
        let from = self.z[i];
        let mut gain = 0.0;
        for (a, b) in (0..k).map(|t| (from, t)).chain((0..k).filter(|&t| t != from).map(|t| (to, t))) {
            gain += self.term_after(i, to, a, b)? - self.terms[a * k + b];
        }
        Some(gain)
    }

    /// Best strictly improving relabeling of node `i`; ties go to the
    /// smaller block id.
    ///
    /// Pairs `(from, t)` with `t` other than the target change the same way
    /// for every target, so they are evaluated once per node.
    fn best_move(&self, i: usize) -> Option<(usize, f64)> {
        let k = self.agg.k;
        let from = self.z[i];
        // any target other than `from` yields the same (from, t) terms
        let probe = if from == 0 { 1 } else { 0 };
        let own = self.term_after(i, probe, from, from)? - self.terms[from * k + from];
        let shared: Vec<Option<f64>> = (0..k)
            .map(|t| {
                if t == from {
                    Some(0.0)
                } else {
                    let other = if t == probe { (0..k).find(|&x| x != from && x != t) } else { Some(probe) };
                    match other {
                        Some(o) => Some(self.term_after(i, o, from, t)? - self.terms[from * k + t]),
                        None => Some(0.0),
                    }
                }
            })
            .collect();
        let invalid = shared.iter().filter(|x| x.is_none()).count();
        let shared_sum: f64 = shared.iter().flatten().sum();

        let mut best: Option<(usize, f64)> = None;
        for to in (0..k).filter(|&b| b != from) {
            let invalid_elsewhere = invalid - usize::from(shared[to].is_none());
            if invalid_elsewhere > 0 {
                continue;
            }
            let mut gain = own + shared_sum - shared[to].unwrap_or(0.0);
            let mut ok = true;
            for (a, b) in std::iter::once((from, to)).chain((0..k).filter(|&t| t != from).map(|t| (to, t))) {
                match self.term_after(i, to, a, b) {
                    Some(term) => gain += term - self.terms[a * k + b],
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && gain > MIN_IMPROVEMENT && best.is_none_or(|(_, g)| gain > g) {
                best = Some((to, gain));
            }
        }
        best
    }

    fn apply_move(&mut self, i: usize, to: usize) {
        let (n, k) = (self.g.n, self.agg.k);
        let from = self.z[i];
        let affected: Vec<(usize, usize)> =
            (0..k).map(|t| (from, t)).chain((0..k).filter(|&t| t != from).map(|t| (to, t))).collect();
        let updates: Vec<(f64, f64, f64)> = affected.iter().map(|&(a, b)| self.pair_delta(i, to, a, b)).collect();
        self.agg.sizes[from] -= 1;
        self.agg.sizes[to] += 1;
        self.z[i] = to;
        for (&(a, b), &(de, dw, mag)) in affected.iter().zip(&updates) {
            let e = (self.agg.edges[a * k + b] + de).max(0.0);
            let z = &self.z;
            let w = self.updated_weight(self.agg.weight[a * k + b], dw, mag, e, || self.exact_weight(z, None, a, b));
            for (x, y) in [(a, b), (b, a)] {
                self.agg.edges[x * k + y] = e;
                self.agg.weight[x * k + y] = w;
            }
        }

        for j in 0..n {
            let w = self.g.get(i, j);
            if w > 0.0 {
                self.node_edges[j * k + from] -= 1.0;
                self.node_edges[j * k + to] += 1.0;
                self.node_weight[j * k + from] = (self.node_weight[j * k + from] - w).max(0.0);
                self.node_weight[j * k + to] += w;
            }
        }
        for t in 0..k {
            self.refresh_term(from, t);
            self.refresh_term(to, t);
        }
    }
}

/// Parameters of the greedy search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl SearchConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k > n {
            return Err(Error::Config(format!("block count {} must lie in [1, {n}]", self.k)));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be >= 1".into()));
        }
        Ok(())
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Runs one greedy ascent from a uniform random assignment.
///
/// Each sweep visits the nodes in a fresh random order and relabels every
/// node whose best alternative block strictly improves the likelihood. The
/// ascent stops after a sweep without moves or after `max_sweeps` sweeps.
fn ascend<L: PairLikelihood + ?Sized>(
    g: &DenseWeights,
    model: &L,
    k: usize,
    max_sweeps: usize,
    rng: &mut ChaCha8Rng,
    mut on_move: impl FnMut(Move),
) -> (Vec<usize>, Vec<usize>, usize) {
    let initial: Vec<usize> = (0..g.n).map(|_| rng.random_range(0..k)).collect();
    let mut state = SearchState::new(g, model, initial.clone(), k);
    let mut order: Vec<usize> = (0..g.n).collect();
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        order.shuffle(rng);
        let mut moved = false;
        for &i in &order {
            if let Some((to, gain)) = state.best_move(i) {
                on_move(Move { node: i, from: state.z[i], to, gain });
                state.apply_move(i, to);
                moved = true;
            }
        }
        if !moved {
            break;
        }
        state.rebuild();
    }
    (initial, state.z, sweeps)
}

/// Best-of-restarts greedy maximization of the profile likelihood.
/// Returns canonical labels and their likelihood. Ties between restarts
/// go to the lower restart index.
pub(crate) fn greedy_fit<L: PairLikelihood + ?Sized>(
    g: &DenseWeights,
    model: &L,
    cfg: SearchConfig,
) -> Result<(Partition, f64)> {
    cfg.validate(g.n)?;
    if cfg.k == 1 {
        let p = Partition::single_block(g.n);
        let ll = profile_log_likelihood(g, p.labels(), 1, model)?;
        return Ok((p, ll));
    }
    let outcomes: Vec<Result<(Vec<usize>, f64)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            let (_, z, _) = ascend(g, model, cfg.k, cfg.max_sweeps, &mut rng, |_| {});
            let ll = profile_log_likelihood(g, &z, cfg.k, model)?;
            Ok((z, ll))
        })
        .collect();

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut last_err = None;
    for outcome in outcomes {
        match outcome {
            Ok((z, ll)) => {
                if best.as_ref().is_none_or(|(_, b)| ll > *b) {
                    best = Some((z, ll));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((z, ll)) => {
            let (canon, _) = canonical_labels(&z);
            Ok((Partition::new(canon, cfg.k)?, ll))
        }
        None => Err(last_err.unwrap_or(Error::NoValidClustering)),
    }
}

/// Replays restart `restart` of [`greedy_fit`], recording every accepted move.
pub(crate) fn greedy_trace<L: PairLikelihood + ?Sized>(
    g: &DenseWeights,
    model: &L,
    cfg: SearchConfig,
    restart: usize,
) -> Result<AscentTrace> {
    cfg.validate(g.n)?;
    let mut rng = restart_rng(cfg.seed, restart);
    let mut moves = Vec::new();
    let (initial, _, sweeps) = ascend(g, model, cfg.k, cfg.max_sweeps, &mut rng, |m| moves.push(m));
    Ok(AscentTrace { initial: Partition::new(initial, cfg.k)?, moves, sweeps })
}

/// Number of partitions of `n` items into at most `k` non-empty blocks.
pub fn count_partitions(n: usize, k: usize) -> u128 {
    // Stirling numbers of the second kind, saturating
    let k = k.min(n);
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            row[j] = (j as u128).saturating_mul(row[j]).saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    if n == 0 {
        return 1;
    }
    row[1..].iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Visits every restricted growth string of length `n` with values below
/// `k`, i.e. every partition into at most `k` blocks exactly once, in
/// lexicographic order.
pub(crate) fn for_each_partition(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if n == 0 {
        visit(&[]);
        return;
    }
    let mut z = vec![0usize; n];
    // prefix_max[i] = max(z[0..=i])
    let mut prefix_max = vec![0usize; n];
    loop {
        visit(&z);
        // find rightmost position that can be incremented
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            let limit = (prefix_max[i - 1] + 1).min(k - 1);
            if z[i] < limit {
                break;
            }
            i -= 1;
        }
        z[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(z[i]);
        for j in i + 1..n {
            z[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

/// Exhaustive maximizer over all partitions into at most `k` blocks. The
/// first maximizer in lexicographic order of canonical labels wins.
pub(crate) fn brute_force<L: PairLikelihood + ?Sized>(
    g: &DenseWeights,
    model: &L,
    k: usize,
) -> Result<(Partition, f64)> {
    if k == 0 || k > g.n {
        return Err(Error::Config(format!("block count {k} must lie in [1, {}]", g.n)));
    }
    let total = count_partitions(g.n, k);
    if total > MAX_ENUMERATION {
        return Err(Error::TooLarge(total));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_partition(g.n, k, |z| {
        if let Ok(ll) = profile_log_likelihood(g, z, k, model) {
            if best.as_ref().is_none_or(|(_, b)| ll > *b) {
                best = Some((z.to_vec(), ll));
            }
        }
    });
    let (z, ll) = best.ok_or(Error::NoValidClustering)?;
    Ok((Partition::new(z, k)?, ll))
}
