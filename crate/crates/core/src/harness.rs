//! Silhouette-driven model selection, threshold sweeps, benchmark runs and
//! result tables.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::baselines::{kmeans_fit, ward_dendrogram, KMeansConfig};
use crate::data::{self, Dataset, LabelColumn, Scaling};
use crate::error::{Error, Result};
use crate::eval::{compare, DistanceMatrix};
use crate::partition::Partition;
use crate::sbm::sbm_fit;
use crate::simgraph::{apply_threshold, induce_graph, threshold_grid, SimilarityMetric};
use crate::wsbm::wsbm_fit;

/// Upper end of the default K sweep.
pub const DEFAULT_K_MAX: usize = 40;
/// Silhouette assigned to labelings with fewer than two non-empty clusters.
pub const SENTINEL_SILHOUETTE: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    KMeans,
    Ward,
    Sbm,
    Wsbm,
    /// Weighted SBM fitted directly at the true number of classes.
    WsbmKnown,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::KMeans, Method::Ward, Method::Sbm, Method::Wsbm, Method::WsbmKnown];

    pub fn id(self) -> &'static str {
        match self {
            Method::KMeans => "kmeans",
            Method::Ward => "ward",
            Method::Sbm => "sbm",
            Method::Wsbm => "wsbm",
            Method::WsbmKnown => "wsbm_known",
        }
    }

    fn display_name(self) -> &'static str {
        match self {
            Method::KMeans => "k-means",
            Method::Ward => "Hierarchical clustering",
            Method::Sbm => "SBM",
            Method::Wsbm => "WSBM",
            Method::WsbmKnown => "WSBM (known)",
        }
    }

    /// Whether the similarity metric influences fitting.
    pub fn uses_graph(self) -> bool {
        matches!(self, Method::Sbm | Method::Wsbm | Method::WsbmKnown)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Where an experiment's data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Iris,
    TwoMoons { n: usize, noise: f64, seed: u64 },
    Circles { n: usize, noise: f64, seed: u64 },
    Ina { n: usize, seed: u64 },
    Csv { path: PathBuf, label_column: Option<LabelColumn> },
}

impl DatasetSpec {
    /// Parses `iris`, `two_moons`, `circles`, `ina` (with their standard sizes and
    /// the given generator settings) or otherwise a CSV path.
    pub fn parse(s: &str, noise: f64, data_seed: u64, label_column: Option<LabelColumn>) -> Self {
        match s {
            "iris" => DatasetSpec::Iris,
            "two_moons" => DatasetSpec::TwoMoons { n: 250, noise, seed: data_seed },
            "circles" => DatasetSpec::Circles { n: 336, noise, seed: data_seed },
            "ina" => DatasetSpec::Ina { n: 660, seed: data_seed },
            path => DatasetSpec::Csv { path: path.into(), label_column },
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Iris => Ok(data::iris()),
            DatasetSpec::TwoMoons { n, noise, seed } => data::gen_two_moons(*n, *noise, *seed),
            DatasetSpec::Circles { n, noise, seed } => data::gen_circles(*n, *noise, *seed),
            DatasetSpec::Ina { n, seed } => data::gen_ina(*n, *seed),
            DatasetSpec::Csv { path, label_column } => data::load_csv(path, label_column.as_ref()),
        }
    }
}

/// Inclusive threshold grid parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self { lo: 0.05, hi: 0.95, step: 0.05 }
    }
}

impl ThresholdGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        threshold_grid(self.lo, self.hi, self.step)
    }
}

/// Fitting and selection settings shared by all methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub method: Method,
    pub metric: SimilarityMetric,
    /// Inclusive K range; `None` means `2..=min(40, n - 1)`.
    pub k_range: Option<(usize, usize)>,
    pub thresholds: ThresholdGrid,
    pub alpha: f64,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub kmeans: KMeansConfig,
    pub seed: u64,
    /// Distance used inside the silhouette; Euclidean keeps scores
    /// comparable across methods.
    pub silhouette_distance: SimilarityMetric,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            method: Method::Wsbm,
            metric: SimilarityMetric::Manhattan,
            k_range: None,
            thresholds: ThresholdGrid::default(),
            alpha: crate::wsbm::DEFAULT_ALPHA,
            restarts: 10,
            max_sweeps: crate::wsbm::DEFAULT_MAX_SWEEPS,
            kmeans: KMeansConfig::default(),
            seed: 0,
            silhouette_distance: SimilarityMetric::Euclidean,
        }
    }
}

impl SelectionConfig {
    pub fn with_method(method: Method) -> Self {
        Self { method, ..Self::default() }
    }

    /// The K values to sweep for a data set of `n` points.
    pub fn ks(&self, n: usize) -> Result<Vec<usize>> {
        if n < 3 {
            return Err(Error::Config(format!("model selection needs at least 3 points, got {n}")));
        }
        let (lo, hi) = self.k_range.unwrap_or((2, DEFAULT_K_MAX.min(n - 1)));
        if lo < 2 || hi > n - 1 || lo > hi {
            return Err(Error::Config(format!("k range {lo}..={hi} must be non-empty within [2, {}]", n - 1)));
        }
        Ok((lo..=hi).collect())
    }
}

/// One experiment: a data set plus selection settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub scaling: Scaling,
    pub selection: SelectionConfig,
}

/// Outcome of one experiment. On failure `error` is set, scores are NaN
/// and `labels` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub dataset: String,
    pub method: Method,
    pub metric: SimilarityMetric,
    pub seed: u64,
    /// Number of non-empty clusters in `labels`.
    pub clusters: usize,
    pub threshold: Option<f64>,
    pub silhouette: f64,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub labels: Vec<usize>,
    pub wall_time: Duration,
    pub error: Option<String>,
}

impl ExperimentResult {
    fn failed(dataset: String, cfg: &SelectionConfig, err: &Error, wall_time: Duration) -> Self {
        Self {
            dataset,
            method: cfg.method,
            metric: cfg.metric,
            seed: cfg.seed,
            clusters: 0,
            threshold: None,
            silhouette: f64::NAN,
            nmi: None,
            ari: None,
            labels: Vec::new(),
            wall_time,
            error: Some(err.to_string()),
        }
    }
}

/// Scores a labeling: silhouette (or the sentinel) plus NMI/ARI against
/// ground truth when the data set has labels.
fn score(ds: &Dataset, dm: &DistanceMatrix, labels: &[usize]) -> Result<(f64, Option<f64>, Option<f64>)> {
    let silhouette = match dm.silhouette(labels) {
        Ok(s) => s.mean_s,
        Err(Error::UndefinedScore(_)) => SENTINEL_SILHOUETTE,
        Err(e) => return Err(e),
    };
    let (nmi, ari) = match ds.labels() {
        Some(truth) => {
            let cmp = compare(truth, labels)?;
            (Some(cmp.nmi), Some(cmp.ari))
        }
        None => (None, None),
    };
    Ok((silhouette, nmi, ari))
}

fn result_from(
    ds: &Dataset,
    dm: &DistanceMatrix,
    cfg: &SelectionConfig,
    labels: Vec<usize>,
    threshold: Option<f64>,
    started: Instant,
) -> Result<ExperimentResult> {
    let (silhouette, nmi, ari) = score(ds, dm, &labels)?;
    Ok(ExperimentResult {
        dataset: ds.name.clone(),
        method: cfg.method,
        metric: cfg.metric,
        seed: cfg.seed,
        clusters: Partition::from_labels(&labels).non_empty_blocks(),
        threshold,
        silhouette,
        nmi,
        ari,
        labels,
        wall_time: started.elapsed(),
        error: None,
    })
}

/// Fits the method at every K of the configured range and keeps the
/// labeling with the highest silhouette; ties go to the smaller K.
/// Applies to k-means, Ward and the weighted SBM.
pub fn select_k(ds: &Dataset, cfg: &SelectionConfig) -> Result<ExperimentResult> {
    let started = Instant::now();
    let ks = cfg.ks(ds.n())?;
    let dm = DistanceMatrix::new(ds, cfg.silhouette_distance);

    let fits: Vec<Result<Partition>> = match cfg.method {
        Method::KMeans => {
            let km = KMeansConfig { restarts: cfg.restarts, ..cfg.kmeans };
            ks.par_iter().map(|&k| kmeans_fit(ds, k, km, cfg.seed)).collect()
        }
        Method::Ward => {
            let dendro = ward_dendrogram(ds);
            ks.iter().map(|&k| dendro.cut(k)).collect()
        }
        Method::Wsbm => {
            let g = induce_graph(ds, cfg.metric)?;
            ks.par_iter()
                .map(|&k| Ok(wsbm_fit(&g, k, cfg.alpha, cfg.restarts, cfg.max_sweeps, cfg.seed)?.partition))
                .collect()
        }
        Method::Sbm | Method::WsbmKnown => {
            return Err(Error::Config(format!("{} does not select over K alone", cfg.method)))
        }
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    for fit in fits {
        let labels = fit?.labels().to_vec();
        let s = match dm.silhouette(&labels) {
            Ok(s) => s.mean_s,
            Err(Error::UndefinedScore(_)) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, labels));
        }
    }
    let (_, labels) = best.ok_or(Error::NoValidClustering)?;
    result_from(ds, &dm, cfg, labels, None, started)
}

/// One cell of a threshold x K sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: f64,
    pub k: usize,
    /// Mean silhouette, or [`SENTINEL_SILHOUETTE`] for degenerate labelings.
    pub silhouette: f64,
    pub nmi: Option<f64>,
    pub labels: Vec<usize>,
}

fn sweep_cells(ds: &Dataset, dm: &DistanceMatrix, cfg: &SelectionConfig) -> Result<Vec<SweepRow>> {
    let ks = cfg.ks(ds.n())?;
    let ts = cfg.thresholds.values()?;
    let g = induce_graph(ds, cfg.metric)?;
    let cells: Vec<(f64, usize)> = ts.iter().flat_map(|&t| ks.iter().map(move |&k| (t, k))).collect();
    cells
        .par_iter()
        .map(|&(t, k)| {
            let b = apply_threshold(&g, t)?;
            let fit = sbm_fit(&b, k, cfg.restarts, cfg.max_sweeps, cfg.seed)?;
            let labels = fit.partition.labels().to_vec();
            let (silhouette, nmi, _) = score(ds, dm, &labels)?;
            Ok(SweepRow { threshold: t, k, silhouette, nmi, labels })
        })
        .collect()
}

/// Full threshold x K grid of SBM fits with silhouette and NMI, ordered by
/// threshold then K.
pub fn sweep_report(ds: &Dataset, cfg: &SelectionConfig) -> Result<Vec<SweepRow>> {
    let dm = DistanceMatrix::new(ds, cfg.silhouette_distance);
    sweep_cells(ds, &dm, cfg)
}

fn pick_best(rows: &[SweepRow]) -> Option<&SweepRow> {
    let mut best: Option<&SweepRow> = None;
    for row in rows.iter().filter(|r| r.silhouette > SENTINEL_SILHOUETTE) {
        let better = match best {
            None => true,
            Some(b) => {
                row.silhouette > b.silhouette
                    || (row.silhouette == b.silhouette && (row.k, row.threshold) < (b.k, b.threshold))
            }
        };
        if better {
            best = Some(row);
        }
    }
    best
}

/// Thresholded SBM: sweeps every (threshold, K) cell and keeps the labeling
/// with the highest silhouette. Ties go to the smaller K, then the smaller
/// threshold.
pub fn select_threshold_and_k(ds: &Dataset, cfg: &SelectionConfig) -> Result<ExperimentResult> {
    let started = Instant::now();
    let dm = DistanceMatrix::new(ds, cfg.silhouette_distance);
    let rows = sweep_cells(ds, &dm, cfg)?;
    let best = pick_best(&rows).ok_or(Error::NoValidClustering)?;
    result_from(ds, &dm, cfg, best.labels.clone(), Some(best.threshold), started)
}

/// Weighted SBM at the true number of classes, without selection.
pub fn fit_known_k(ds: &Dataset, cfg: &SelectionConfig) -> Result<ExperimentResult> {
    let started = Instant::now();
    let k = ds.n_classes().ok_or_else(|| Error::Config("known-K fit requires ground-truth labels".into()))?;
    let dm = DistanceMatrix::new(ds, cfg.silhouette_distance);
    let g = induce_graph(ds, cfg.metric)?;
    let fit = wsbm_fit(&g, k, cfg.alpha, cfg.restarts, cfg.max_sweeps, cfg.seed)?;
    result_from(ds, &dm, cfg, fit.partition.labels().to_vec(), None, started)
}

/// Runs a single configured experiment on an already loaded data set.
pub fn run_on(ds: &Dataset, cfg: &SelectionConfig) -> Result<ExperimentResult> {
    match cfg.method {
        Method::KMeans | Method::Ward | Method::Wsbm => select_k(ds, cfg),
        Method::Sbm => select_threshold_and_k(ds, cfg),
        Method::WsbmKnown => fit_known_k(ds, cfg),
    }
}

/// Loads, scales and runs one experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let ds = data::standardize(&config.dataset.load()?, config.scaling);
    run_on(&ds, &config.selection)
}

/// Runs every configuration in order. A failing configuration yields a
/// row with `error` set and the run continues.
pub fn run_benchmark(configs: &[ExperimentConfig]) -> Vec<ExperimentResult> {
    configs
        .iter()
        .map(|config| {
            let started = Instant::now();
            run_experiment(config).unwrap_or_else(|e| {
                let name = match &config.dataset {
                    DatasetSpec::Iris => "iris".to_string(),
                    DatasetSpec::TwoMoons { .. } => "two_moons".to_string(),
                    DatasetSpec::Circles { .. } => "circles".to_string(),
                    DatasetSpec::Ina { .. } => "ina".to_string(),
                    DatasetSpec::Csv { path, .. } => {
                        path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into())
                    }
                };
                ExperimentResult::failed(name, &config.selection, &e, started.elapsed())
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::Config(format!("unknown table format '{other}'"))),
        }
    }
}

pub const TABLE_COLUMNS: [&str; 9] =
    ["dataset", "method", "metric", "silhouette", "nmi", "ari", "clusters", "threshold", "seed"];

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.filter(|v| v.is_finite()).map(|v| format!("{v:.digits$}")).unwrap_or_default()
}

/// Renders results as CSV (6 decimals) or a markdown table (4 decimals).
/// Failed rows keep their identifying columns and leave scores empty.
pub fn emit_table(results: &[ExperimentResult], format: TableFormat) -> String {
    let digits = match format {
        TableFormat::Csv => 6,
        TableFormat::Markdown => 4,
    };
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let ok = r.error.is_none();
            vec![
                r.dataset.clone(),
                match format {
                    TableFormat::Csv => r.method.id().to_string(),
                    TableFormat::Markdown => r.method.display_name().to_string(),
                },
                r.metric.to_string(),
                fmt_opt(Some(r.silhouette), digits),
                fmt_opt(r.nmi, digits),
                fmt_opt(r.ari, digits),
                if ok { r.clusters.to_string() } else { String::new() },
                fmt_opt(r.threshold, 2),
                r.seed.to_string(),
            ]
        })
        .collect();

    match format {
        TableFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(TABLE_COLUMNS).expect("in-memory write");
            for row in &rows {
                w.write_record(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        TableFormat::Markdown => {
            let mut out = String::new();
            let header = ["Dataset", "Method", "Metric", "Silhouette", "NMI", "ARI", "Clusters", "Threshold", "Seed"];
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for row in &rows {
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
            out
        }
    }
}

/// Sweep table as CSV with columns `t,k,silhouette,nmi`.
pub fn emit_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from("t,k,silhouette,nmi\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.6},{}", r.threshold, r.k, r.silhouette, fmt_opt(r.nmi, 6));
    }
    out
}

/// Labels as CSV with columns `index,label`.
pub fn emit_labels(labels: &[usize]) -> String {
    let mut out = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i},{l}");
    }
    out
}

/// Per-threshold view of a sweep: the best-silhouette cell at each
/// threshold, plus the thresholds where silhouette and NMI peak.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdProfile {
    /// `(threshold, silhouette, nmi)` of the best cell per threshold.
    pub points: Vec<(f64, f64, Option<f64>)>,
    pub silhouette_argmax: Option<f64>,
    pub nmi_argmax: Option<f64>,
}

impl ThresholdProfile {
    pub fn peaks_agree(&self) -> Option<bool> {
        Some(self.silhouette_argmax? == self.nmi_argmax?)
    }
}

pub fn threshold_profile(rows: &[SweepRow]) -> ThresholdProfile {
    let mut thresholds: Vec<f64> = rows.iter().map(|r| r.threshold).collect();
    thresholds.dedup();
    let points: Vec<(f64, f64, Option<f64>)> = thresholds
        .iter()
        .filter_map(|&t| {
            let cells: Vec<SweepRow> = rows.iter().filter(|r| r.threshold == t).cloned().collect();
            pick_best(&cells).map(|b| (t, b.silhouette, b.nmi))
        })
        .collect();
    type Point = (f64, f64, Option<f64>);
    let argmax = |key: &dyn Fn(&Point) -> Option<f64>| {
        let mut best: Option<(f64, f64)> = None;
        for p in &points {
            if let Some(v) = key(p) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((p.0, v));
                }
            }
        }
        best.map(|(t, _)| t)
    };
    ThresholdProfile { silhouette_argmax: argmax(&|p| Some(p.1)), nmi_argmax: argmax(&|p| p.2), points }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two tight blobs of `m` points each, far apart.
    fn two_blobs(m: usize) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for c in 0..2 {
            for i in 0..m {
                let off = c as f64 * 20.0;
                rows.push(vec![off + 0.01 * i as f64, off + 0.013 * ((i * 7) % m) as f64]);
                labels.push(c);
            }
        }
        Dataset::from_rows("blobs", rows, Some(labels)).unwrap()
    }

    #[test]
    fn two_blobs_select_two_for_every_method() {
        let ds = two_blobs(10);
        for method in [Method::KMeans, Method::Ward, Method::Wsbm] {
            let cfg = SelectionConfig { k_range: Some((2, 5)), ..SelectionConfig::with_method(method) };
            let r = select_k(&ds, &cfg).unwrap();
            assert_eq!(r.clusters, 2, "{method}");
            assert_eq!(r.ari, Some(1.0), "{method} {:?}", r.labels);
        }
    }

    #[test]
    fn separable_sbm_sweep_recovers_blobs() {
        let ds = two_blobs(10);
        // intra-blob Manhattan distances are < 0.3, inter-blob ones ~40
        let cfg = SelectionConfig {
            k_range: Some((2, 3)),
            thresholds: ThresholdGrid { lo: 0.3, hi: 0.7, step: 0.2 },
            ..SelectionConfig::with_method(Method::Sbm)
        };
        let r = select_threshold_and_k(&ds, &cfg).unwrap();
        assert_eq!(r.clusters, 2);
        assert_eq!(r.ari, Some(1.0));
        for row in sweep_report(&ds, &cfg).unwrap().iter().filter(|r| r.k == 2) {
            assert_eq!(compare(ds.labels().unwrap(), &row.labels).unwrap().ari, 1.0);
        }
    }

    #[test]
    fn single_cell_sweep_is_one_fit() {
        let ds = two_blobs(6);
        let cfg = SelectionConfig {
            k_range: Some((2, 2)),
            thresholds: ThresholdGrid { lo: 0.5, hi: 0.5, step: 0.1 },
            ..SelectionConfig::with_method(Method::Sbm)
        };
        let rows = sweep_report(&ds, &cfg).unwrap();
        assert_eq!(rows.len(), 1);
        let g = apply_threshold(&induce_graph(&ds, cfg.metric).unwrap(), 0.5).unwrap();
        let fit = sbm_fit(&g, 2, cfg.restarts, cfg.max_sweeps, cfg.seed).unwrap();
        assert_eq!(rows[0].labels, fit.partition.labels());
        let best = select_threshold_and_k(&ds, &cfg).unwrap();
        assert_eq!(best.labels, rows[0].labels);
        assert_eq!(best.threshold, Some(0.5));
    }

    #[test]
    fn sweep_is_cartesian_product() {
        let ds = two_blobs(6);
        let cfg = SelectionConfig {
            k_range: Some((2, 4)),
            thresholds: ThresholdGrid { lo: 0.1, hi: 0.3, step: 0.1 },
            restarts: 2,
            ..SelectionConfig::with_method(Method::Sbm)
        };
        let rows = sweep_report(&ds, &cfg).unwrap();
        assert_eq!(rows.len(), 9);
        let best = select_threshold_and_k(&ds, &cfg).unwrap();
        let max = rows.iter().map(|r| r.silhouette).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best.silhouette, max);
    }

    #[test]
    fn identical_points_and_bad_ranges() {
        // identical points: every labeling has silhouette 0
        let ds = Dataset::from_rows("flat", vec![vec![0.0]; 4], Some(vec![0, 0, 1, 1])).unwrap();
        let cfg = SelectionConfig { k_range: Some((2, 3)), ..SelectionConfig::with_method(Method::Ward) };
        let r = select_k(&ds, &cfg).unwrap();
        assert_eq!(r.silhouette, 0.0);

        let empty = SelectionConfig { k_range: Some((3, 2)), ..SelectionConfig::with_method(Method::Ward) };
        assert!(matches!(select_k(&ds, &empty), Err(Error::Config(_))));
        let too_big = SelectionConfig { k_range: Some((2, 4)), ..SelectionConfig::with_method(Method::Ward) };
        assert!(select_k(&ds, &too_big).is_err());
    }

    #[test]
    fn pick_best_tie_breaks() {
        let row = |t, k, s| SweepRow { threshold: t, k, silhouette: s, nmi: None, labels: vec![] };
        let rows = vec![row(0.1, 3, 0.5), row(0.2, 2, 0.5), row(0.1, 2, 0.5), row(0.3, 2, -1.0)];
        let b = pick_best(&rows).unwrap();
        assert_eq!((b.threshold, b.k), (0.1, 2));
        assert!(pick_best(&[row(0.1, 2, -1.0)]).is_none());
    }

    #[test]
    fn table_formats() {
        let r = ExperimentResult {
            dataset: "iris".into(),
            method: Method::Ward,
            metric: SimilarityMetric::Euclidean,
            seed: 3,
            clusters: 2,
            threshold: None,
            silhouette: 0.68642,
            nmi: Some(0.7337),
            ari: Some(0.5681),
            labels: vec![0, 1],
            wall_time: Duration::ZERO,
            error: None,
        };
        let csv = emit_table(std::slice::from_ref(&r), TableFormat::Csv);
        assert_eq!(
            csv,
            "dataset,method,metric,silhouette,nmi,ari,clusters,threshold,seed\n\
             iris,ward,euclidean,0.686420,0.733700,0.568100,2,,3\n"
        );
        let md = emit_table(&[r], TableFormat::Markdown);
        assert_eq!(md.lines().count(), 3);
        assert!(md.contains("| iris | Hierarchical clustering | euclidean | 0.6864 | 0.7337 | 0.5681 | 2 |  | 3 |"));
        assert_eq!(emit_table(&[], TableFormat::Csv).lines().count(), 1);
    }

    #[test]
    fn benchmark_records_failures_and_keeps_order() {
        let bad = ExperimentConfig {
            dataset: DatasetSpec::Csv { path: "/no/such/file.csv".into(), label_column: None },
            scaling: Scaling::None,
            selection: SelectionConfig::with_method(Method::Ward),
        };
        let good = ExperimentConfig {
            dataset: DatasetSpec::Ina { n: 60, seed: 1 },
            scaling: Scaling::None,
            selection: SelectionConfig { k_range: Some((2, 4)), ..SelectionConfig::with_method(Method::KMeans) },
        };
        let results = run_benchmark(&[bad, good]);
        assert_eq!(results.len(), 2);
        assert!(results[0].error.is_some());
        assert_eq!(results[0].dataset, "file");
        assert!(results[1].error.is_none());
        assert!(run_benchmark(&[]).is_empty());
        let table = emit_table(&results, TableFormat::Csv);
        assert!(table.lines().nth(1).unwrap().starts_with("file,ward,manhattan,,,,,,0"));
    }

    #[test]
    fn known_k_needs_labels() {
        let ds = Dataset::from_rows("u", vec![vec![0.0], vec![1.0], vec![5.0]], None).unwrap();
        assert!(fit_known_k(&ds, &SelectionConfig::with_method(Method::WsbmKnown)).is_err());
        let ina = data::gen_ina(60, 2).unwrap();
        let r = fit_known_k(&ina, &SelectionConfig::with_method(Method::WsbmKnown)).unwrap();
        assert!(r.clusters <= 3);
    }

    #[test]
    fn labels_and_sweep_csv() {
        assert_eq!(emit_labels(&[1, 0]), "index,label\n0,1\n1,0\n");
        let rows = vec![SweepRow { threshold: 0.1, k: 2, silhouette: 0.5, nmi: None, labels: vec![] }];
        assert_eq!(emit_sweep(&rows), "t,k,silhouette,nmi\n0.1,2,0.500000,\n");
    }

    #[test]
    fn threshold_profile_peaks() {
        let row = |t, k, s, n| SweepRow { threshold: t, k, silhouette: s, nmi: Some(n), labels: vec![] };
        let rows = vec![row(0.1, 2, 0.2, 0.3), row(0.1, 3, 0.4, 0.5), row(0.2, 2, 0.6, 0.8), row(0.3, 2, 0.1, 0.9)];
        let p = threshold_profile(&rows);
        assert_eq!(p.points.len(), 3);
        assert_eq!(p.points[0], (0.1, 0.4, Some(0.5)));
        assert_eq!(p.silhouette_argmax, Some(0.2));
        assert_eq!(p.nmi_argmax, Some(0.3));
        assert_eq!(p.peaks_agree(), Some(false));
    }
}
