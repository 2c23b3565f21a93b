//! Bernoulli naive Bayes with additive smoothing, evaluated in log space.
//!
//! `P(x_j = 1 | c) = (count_cj + alpha) / (n_c + 2 alpha)`; posteriors are
//! the softmax of `log prior + sum_j log P(x_j | c)`.

use serde::{Deserialize, Serialize};

use super::model::{ModelPayload, TrainedModel};
use super::{log_or_floor, softmax};
use crate::dataset::{LabeledDataset, SymptomVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbParams {
    pub alpha: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub alpha: f64,
    pub log_prior: Vec<f64>,
    /// `log P(x_j = 1 | c)`, indexed `[class][feature]`.
    pub log_present: Vec<Vec<f64>>,
    /// `log P(x_j = 0 | c)`.
    pub log_absent: Vec<Vec<f64>>,
}

impl NbModel {
    pub fn log_joint(&self, x: &SymptomVector) -> Vec<f64> {
        (0..self.log_prior.len())
            .map(|c| {
                let present = &self.log_present[c];
                let absent = &self.log_absent[c];
                self.log_prior[c]
                    + x.bits()
                        .iter()
                        .enumerate()
                        .map(|(j, &b)| if b == 1 { present[j] } else { absent[j] })
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &SymptomVector) -> Vec<f64> {
        softmax(&self.log_joint(x))
    }
}

pub fn train_nb(ds: &LabeledDataset, alpha: f64) -> Result<TrainedModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "smoothing alpha must be positive, got {alpha}"
        )));
    }
    let n_classes = ds.n_classes();
    let n_features = ds.n_features();
    let class_counts = ds.class_counts();
    let mut ones = vec![vec![0usize; n_features]; n_classes];
    for (x, y) in ds.samples() {
        for j in x.active() {
            ones[*y][j] += 1;
        }
    }
    let mut log_present = Vec::with_capacity(n_classes);
    let mut log_absent = Vec::with_capacity(n_classes);
    for (c, counts) in ones.iter().enumerate() {
        let denom = class_counts[c] as f64 + 2.0 * alpha;
        let p: Vec<f64> = counts.iter().map(|&k| (k as f64 + alpha) / denom).collect();
        log_present.push(p.iter().map(|p| p.ln()).collect());
        log_absent.push(p.iter().map(|p| (1.0 - p).ln()).collect());
    }
    let n = ds.len() as f64;
    let model = NbModel {
        alpha,
        log_prior: class_counts.iter().map(|&c| log_or_floor(c as f64 / n)).collect(),
        log_present,
        log_absent,
    };
    TrainedModel::for_dataset(ds, ModelPayload::Nb(model))
}
