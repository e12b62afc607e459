//! Block assignments and fitted-model records.

use crate::error::{Error, Result};

/// Assignment of `n` items to blocks `0..k`. Blocks may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    z: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(z: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("block count must be >= 1".into()));
        }
        if let Some(&bad) = z.iter().find(|&&b| b >= k) {
            return Err(Error::Config(format!("block id {bad} out of range for k = {k}")));
        }
        Ok(Self { z, k })
    }

    /// Builds a partition from arbitrary labels, relabelled canonically.
    pub fn from_labels(labels: &[usize]) -> Self {
        let (z, k) = canonical_labels(labels);
        Self { z, k: k.max(1) }
    }

    pub fn single_block(n: usize) -> Self {
        Self { z: vec![0; n], k: 1 }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.z
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.z[i]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        self.z.iter().for_each(|&b| sizes[b] += 1);
        sizes
    }

    pub fn non_empty_blocks(&self) -> usize {
        self.block_sizes().iter().filter(|&&s| s > 0).count()
    }

    /// Relabels blocks by order of first occurrence; `k` becomes the number
    /// of non-empty blocks.
    pub fn canonical(&self) -> Self {
        Self::from_labels(&self.z)
    }
}

/// Relabels by order of first occurrence. Returns the new labels and the
/// number of distinct values.
pub(crate) fn canonical_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let z = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (z, map.len())
}

/// Maximum-likelihood parameters of a fitted block model.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    /// Bernoulli SBM: `theta[r][s]` is the edge probability between blocks.
    Sbm { theta: Vec<Vec<f64>> },
    /// Weighted SBM with exponential weights: `rates[r][s]` is the rate
    /// MLE. Block pairs without any observed edge carry rate 0.
    Wsbm { rates: Vec<Vec<f64>>, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub partition: Partition,
    pub params: ModelParams,
    pub log_likelihood: f64,
    pub restarts_used: usize,
    pub seed: u64,
}

impl FitResult {
    /// Text record `dataset,method,K,threshold,loglik,seed`. The threshold
    /// field is empty for weighted fits.
    pub fn to_record(&self, dataset: &str, method: &str, threshold: Option<f64>) -> String {
        format!(
            "{dataset},{method},{},{},{},{}",
            self.partition.k(),
            threshold.map(|t| t.to_string()).unwrap_or_default(),
            self.log_likelihood,
            self.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_relabel() {
        let p = Partition::new(vec![2, 2, 0, 3, 0], 4).unwrap();
        let c = p.canonical();
        assert_eq!(c.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(c.k(), 3);
        assert_eq!(p.non_empty_blocks(), 3);
        assert_eq!(p.block_sizes(), [2, 0, 2, 1]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Partition::new(vec![0, 3], 3).is_err());
        assert!(Partition::new(vec![], 0).is_err());
    }

    #[test]
    fn record_format() {
        let fit = FitResult {
            partition: Partition::new(vec![0, 1], 2).unwrap(),
            params: ModelParams::Sbm { theta: vec![vec![0.0; 2]; 2] },
            log_likelihood: -1.5,
            restarts_used: 3,
            seed: 7,
        };
        assert_eq!(fit.to_record("iris", "sbm", Some(0.2)), "iris,sbm,2,0.2,-1.5,7");
        assert_eq!(fit.to_record("iris", "wsbm", None), "iris,wsbm,2,,-1.5,7");
    }
}
