//! k-nearest neighbours under Hamming distance.

use serde::{Deserialize, Serialize};

use super::model::{ModelPayload, TrainedModel};
use crate::dataset::{LabeledDataset, SymptomVector};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: DEFAULT_K }
    }
}

/// Stored training set. Rows are kept bit-packed in memory and as lists of
/// active symptom indices on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "KnnRepr", from = "KnnRepr")]
pub struct KnnModel {
    pub k: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub labels: Vec<usize>,
    packed: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct KnnRepr {
    k: usize,
    n_features: usize,
    n_classes: usize,
    labels: Vec<usize>,
    rows: Vec<Vec<usize>>,
}

impl From<KnnModel> for KnnRepr {
    fn from(m: KnnModel) -> Self {
        let rows = m
            .packed
            .iter()
            .map(|words| {
                (0..m.n_features)
                    .filter(|&j| words[j / 64] >> (j % 64) & 1 == 1)
                    .collect()
            })
            .collect();
        KnnRepr {
            k: m.k,
            n_features: m.n_features,
            n_classes: m.n_classes,
            labels: m.labels,
            rows,
        }
    }
}

impl From<KnnRepr> for KnnModel {
    fn from(r: KnnRepr) -> Self {
        let words = r.n_features.div_ceil(64);
        let packed = r
            .rows
            .iter()
            .map(|active| {
                let mut w = vec![0u64; words];
                for &j in active {
                    // Out-of-range indices in a hand-edited file are ignored.
                    if j < r.n_features {
                        w[j / 64] |= 1 << (j % 64);
                    }
                }
                w
            })
            .collect();
        KnnModel {
            k: r.k,
            n_features: r.n_features,
            n_classes: r.n_classes,
            labels: r.labels,
            packed,
        }
    }
}

fn pack(x: &SymptomVector) -> Vec<u64> {
    let mut w = vec![0u64; x.len().div_ceil(64)];
    for j in x.active() {
        w[j / 64] |= 1 << (j % 64);
    }
    w
}

impl KnnModel {
    /// The `k` nearest training rows as `(distance, row)`, nearest first;
    /// equal distances resolve to the lower row index.
    pub fn neighbours(&self, x: &SymptomVector) -> Vec<(u32, usize)> {
        let q = pack(x);
        let mut dist: Vec<(u32, usize)> = self
            .packed
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d = row.iter().zip(&q).map(|(a, b)| (a ^ b).count_ones()).sum();
                (d, i)
            })
            .collect();
        let k = self.k.min(dist.len());
        if k < dist.len() {
            dist.select_nth_unstable(k - 1);
            dist.truncate(k);
        }
        dist.sort_unstable();
        dist
    }

    pub fn predict_proba(&self, x: &SymptomVector) -> Vec<f64> {
        let neighbours = self.neighbours(x);
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in &neighbours {
            votes[self.labels[i]] += 1.0;
        }
        let k = neighbours.len() as f64;
        votes.iter_mut().for_each(|v| *v /= k);
        votes
    }
}

pub fn train_knn(ds: &LabeledDataset, k: usize) -> Result<TrainedModel> {
    if k == 0 || k > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            ds.len()
        )));
    }
    let model = KnnModel {
        k,
        n_features: ds.n_features(),
        n_classes: ds.n_classes(),
        labels: ds.targets(),
        packed: ds.samples().iter().map(|(x, _)| pack(x)).collect(),
    };
    TrainedModel::for_dataset(ds, ModelPayload::Knn(model))
}
