//! Random forest of entropy-split classification trees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ModelPayload, TrainedModel};
use super::params::MaxFeatures;
use super::tree::{grow, normalise_counts, BinaryMatrix, ClassificationTree, Entropy, TreeConstraints};
use crate::dataset::{LabeledDataset, SymptomVector};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub n_trees: usize,
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub params: RfParams,
    pub n_classes: usize,
    pub trees: Vec<ClassificationTree>,
}

impl RfModel {
    /// Mean of the per-tree leaf distributions.
    pub fn predict_proba(&self, x: &SymptomVector) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (o, p) in out.iter_mut().zip(normalise_counts(tree.leaf(x))) {
                *o += p;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

pub fn train_rf(ds: &LabeledDataset, params: &RfParams) -> Result<TrainedModel> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
    }
    if params.max_depth == Some(0) {
        return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
    }
    let data = BinaryMatrix::from_dataset(ds);
    let labels = ds.targets();
    let objective = Entropy {
        labels: &labels,
        n_classes: ds.n_classes(),
    };
    let constraints = TreeConstraints {
        max_depth: params.max_depth,
        max_features: params.max_features,
        ..TreeConstraints::default()
    };
    let n = data.n_rows();
    let trees: Vec<ClassificationTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = SplitMix64::derive(params.seed, &[t as u64]);
            let rows = if params.bootstrap {
                (0..n).map(|_| rng.below(n)).collect()
            } else {
                (0..n).collect()
            };
            grow(&data, rows, &constraints, &objective, &mut rng)
        })
        .collect();
    TrainedModel::for_dataset(
        ds,
        ModelPayload::Rf(RfModel {
            params: params.clone(),
            n_classes: ds.n_classes(),
            trees,
        }),
    )
}
