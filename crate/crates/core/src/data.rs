//! Data sets: CSV loading, synthetic generators and feature scaling.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Blob centers of the INA approximation: an equilateral triangle of side 4.
pub const INA_CENTERS: [[f64; 2]; 3] = [[0.0, 0.0], [4.0, 0.0], [2.0, 3.464_101_615_137_754_6]];
/// Per-coordinate standard deviation of the INA blobs.
pub const INA_STDDEV: f64 = 0.6;

/// An `n x d` matrix of real features, stored row-major, with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    features: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<usize>>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a data set from rows. Every row must have the same, nonzero
    /// number of finite entries and there must be at least two rows.
    pub fn from_rows(name: impl Into<String>, rows: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Data(format!("need at least 2 instances, found {n}")));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Data("rows have no features".into()));
        }
        let mut features = Vec::with_capacity(n * d);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow { row: i, expected: d, found: row.len() });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonNumeric { row: i, column: String::new(), value: v.to_string() });
            }
            features.extend(row);
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: l.len() });
            }
        }
        let class_names = match &labels {
            Some(l) => (0..l.iter().max().map_or(0, |m| m + 1)).map(|c| c.to_string()).collect(),
            None => Vec::new(),
        };
        Ok(Self {
            name: name.into(),
            feature_names: (0..d).map(|j| format!("x{j}")).collect(),
            features,
            n,
            d,
            labels,
            class_names,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Number of distinct ground-truth classes, or `None` without labels.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut seen = vec![false; l.iter().max().map_or(0, |m| m + 1)];
            l.iter().for_each(|&c| seen[c] = true);
            seen.into_iter().filter(|&s| s).count()
        })
    }

    /// Writes the data set as CSV: one column per feature and, when labels
    /// are present, a trailing `class` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.feature_names.clone();
        if self.labels.is_some() {
            header.push("class".into());
        }
        w.write_record(&header)?;
        for (i, row) in self.rows().enumerate() {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if let Some(l) = &self.labels {
                rec.push(self.class_names[l[i]].clone());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
        Ok(())
    }
}

/// Which column of a CSV file holds the class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Purely numeric strings are taken as 0-based column indices.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

/// Loads a CSV file with a header line. All columns except the label column
/// must parse as finite reals; labels are mapped to class ids in order of
/// first appearance.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let name = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    parse_csv(&name, &text, label_column)
}

/// Parses CSV text; see [`load_csv`].
pub fn parse_csv(name: &str, text: &str, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = match label_column {
        None => None,
        Some(LabelColumn::Name(col)) => {
            Some(header.iter().position(|h| h == col).ok_or_else(|| Error::LabelColumnNotFound(col.clone()))?)
        }
        Some(LabelColumn::Index(i)) if *i < header.len() => Some(*i),
        Some(LabelColumn::Index(i)) => return Err(Error::LabelColumnNotFound(i.to_string())),
    };

    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow { row: i, expected: header.len(), found: record.len() });
        }
        let mut row = Vec::with_capacity(header.len());
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if Some(j) == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => return Err(Error::NonNumeric { row: i, column: header[j].clone(), value: cell.to_string() }),
            }
        }
        rows.push(row);
    }

    let (labels, class_names) = match label_idx {
        Some(_) => {
            let mut ids: HashMap<&str, usize> = HashMap::new();
            let mut names = Vec::new();
            let labels = raw_labels
                .iter()
                .map(|l| {
                    *ids.entry(l.as_str()).or_insert_with(|| {
                        names.push(l.clone());
                        names.len() - 1
                    })
                })
                .collect();
            (Some(labels), names)
        }
        None => (None, Vec::new()),
    };

    let mut ds = Dataset::from_rows(name, rows, labels)?;
    ds.feature_names = header.into_iter().enumerate().filter(|(j, _)| Some(*j) != label_idx).map(|(_, h)| h).collect();
    if label_idx.is_some() {
        ds.class_names = class_names;
    }
    Ok(ds)
}

/// The Iris data set (150 x 4, three classes), bundled with the crate.
pub fn iris() -> Dataset {
    parse_csv("iris", IRIS_CSV, Some(&LabelColumn::Name("class".into()))).expect("bundled iris.csv is valid")
}

fn gaussian_noise(seed: u64, noise: f64) -> Result<(ChaCha8Rng, Normal<f64>)> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::Config(format!("noise must be a finite value >= 0, got {noise}")));
    }
    let normal = Normal::new(0.0, noise).map_err(|e| Error::Config(e.to_string()))?;
    Ok((ChaCha8Rng::seed_from_u64(seed), normal))
}

/// `m` evenly spaced values from `lo` to `hi` inclusive; a single value is `lo`.
fn linspace(lo: f64, hi: f64, m: usize) -> impl Iterator<Item = f64> {
    let step = if m > 1 { (hi - lo) / (m - 1) as f64 } else { 0.0 };
    (0..m).map(move |i| lo + step * i as f64)
}

/// Two interleaving half circles. The upper moon gets `n / 2` points, the
/// lower moon the rest; Gaussian noise with standard deviation `noise` is
/// added to both coordinates.
pub fn gen_two_moons(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Config(format!("two moons needs n >= 2, got {n}")));
    }
    let (mut rng, normal) = gaussian_noise(seed, noise)?;
    let n_upper = n / 2;
    let n_lower = n - n_upper;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for t in linspace(0.0, PI, n_upper) {
        rows.push(vec![t.cos(), t.sin()]);
        labels.push(0);
    }
    for t in linspace(0.0, PI, n_lower) {
        rows.push(vec![1.0 - t.cos(), 0.5 - t.sin()]);
        labels.push(1);
    }
    for row in &mut rows {
        for v in row.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Dataset::from_rows("two_moons", rows, Some(labels))
}

/// Sizes of a three-way split of `n`; the remainder goes to the later groups.
fn three_way_split(n: usize) -> [usize; 3] {
    let base = n / 3;
    let rem = n % 3;
    [base, base + usize::from(rem >= 2), base + usize::from(rem >= 1)]
}

/// Three concentric circles of radii 1, 2 and 3 labelled by ring index.
pub fn gen_circles(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 3 {
        return Err(Error::Config(format!("circles needs n >= 3, got {n}")));
    }
    let (mut rng, normal) = gaussian_noise(seed, noise)?;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (ring, &m) in three_way_split(n).iter().enumerate() {
        let radius = (ring + 1) as f64;
        for k in 0..m {
            let t = 2.0 * PI * k as f64 / m as f64;
            rows.push(vec![radius * t.cos() + normal.sample(&mut rng), radius * t.sin() + normal.sample(&mut rng)]);
            labels.push(ring);
        }
    }
    Dataset::from_rows("circles", rows, Some(labels))
}

/// Three isotropic Gaussian blobs standing in for the INA data set, whose
/// original generator is not published. Centers are [`INA_CENTERS`], the
/// spread is [`INA_STDDEV`].
pub fn gen_ina(n: usize, seed: u64) -> Result<Dataset> {
    if n < 3 {
        return Err(Error::Config(format!("ina needs n >= 3, got {n}")));
    }
    let (mut rng, normal) = gaussian_noise(seed, INA_STDDEV)?;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (blob, &m) in three_way_split(n).iter().enumerate() {
        let [cx, cy] = INA_CENTERS[blob];
        for _ in 0..m {
            rows.push(vec![cx + normal.sample(&mut rng), cy + normal.sample(&mut rng)]);
            labels.push(blob);
        }
    }
    Dataset::from_rows("ina", rows, Some(labels))
}

/// Per-feature rescaling applied before graph induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    #[default]
    None,
    MinMax,
    ZScore,
}

impl FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Scaling::None),
            "minmax" => Ok(Scaling::MinMax),
            "zscore" => Ok(Scaling::ZScore),
            other => Err(Error::Config(format!("unknown scaling mode '{other}'"))),
        }
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scaling::None => "none",
            Scaling::MinMax => "minmax",
            Scaling::ZScore => "zscore",
        })
    }
}

/// Rescales every feature independently. Constant features map to 0 under
/// both `MinMax` and `ZScore`.
pub fn standardize(ds: &Dataset, mode: Scaling) -> Dataset {
    let mut out = ds.clone();
    if mode == Scaling::None {
        return out;
    }
    let (n, d) = (ds.n, ds.d);
    for j in 0..d {
        let col = || (0..n).map(|i| ds.features[i * d + j]);
        let (shift, scale) = match mode {
            Scaling::MinMax => {
                let lo = col().fold(f64::INFINITY, f64::min);
                let hi = col().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi - lo)
            }
            Scaling::ZScore => {
                let mean = col().sum::<f64>() / n as f64;
                let var = col().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                (mean, var.sqrt())
            }
            Scaling::None => unreachable!(),
        };
        for i in 0..n {
            let v = &mut out.features[i * d + j];
            *v = if scale > 0.0 { (*v - shift) / scale } else { 0.0 };
        }
    }
    out
}
