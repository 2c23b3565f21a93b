//! Multiclass gradient boosting with softmax log-loss.
//!
//! Scores start at the log class priors. Each round draws a row subsample
//! (without replacement), computes residuals `one_hot - softmax(scores)` and
//! fits one regression tree per class to them. Leaves take a single Newton
//! step shrunk by the learning rate. Trees within a round are independent,
//! so they are fitted in parallel; each draws randomness from
//! `(seed, round, class)` and the result does not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{ModelPayload, TrainedModel};
use super::params::{validate_gbm, GbmParams, ValidationMode};
use super::tree::{grow, BinaryMatrix, NewtonResidual, RegressionTree, TreeConstraints};
use super::{log_or_floor, softmax};
use crate::dataset::{LabeledDataset, SymptomVector};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub params: GbmParams,
    /// Log class priors of the training set.
    pub initial_scores: Vec<f64>,
    /// `trees[class][round]`.
    pub trees: Vec<Vec<RegressionTree>>,
}

impl GbmModel {
    pub fn scores(&self, x: &SymptomVector) -> Vec<f64> {
        self.initial_scores
            .iter()
            .zip(&self.trees)
            .map(|(&init, trees)| init + trees.iter().map(|t| *t.leaf(x)).sum::<f64>())
            .collect()
    }

    pub fn predict_proba(&self, x: &SymptomVector) -> Vec<f64> {
        softmax(&self.scores(x))
    }
}

/// Multiclass log-loss of one sample, `-ln softmax(scores)[target]`.
pub fn log_loss(scores: &[f64], target: usize) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|&s| (s - max).exp()).sum::<f64>().ln();
    lse - scores[target]
}

/// Gradient of [`log_loss`] with respect to the scores: `softmax - one_hot`.
pub fn log_loss_gradient(scores: &[f64], target: usize) -> Vec<f64> {
    let mut g = softmax(scores);
    g[target] -= 1.0;
    g
}

/// A fitted model plus the mean training log-loss before the first round
/// and after every round (`n_estimators + 1` entries).
#[derive(Debug, Clone)]
pub struct GbmFit {
    pub model: TrainedModel,
    pub loss_trace: Vec<f64>,
}

pub fn train_gbm(ds: &LabeledDataset, params: &GbmParams, mode: ValidationMode) -> Result<TrainedModel> {
    train_gbm_traced(ds, params, mode).map(|fit| fit.model)
}

pub fn train_gbm_traced(
    ds: &LabeledDataset,
    params: &GbmParams,
    mode: ValidationMode,
) -> Result<GbmFit> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let violations = validate_gbm(params, mode);
    if !violations.is_empty() {
        return Err(Error::InvalidParams(violations));
    }

    let n = ds.len();
    let n_classes = ds.n_classes();
    let labels = ds.targets();
    let initial_scores: Vec<f64> = ds
        .class_counts()
        .iter()
        .map(|&c| log_or_floor(c as f64 / n as f64))
        .collect();

    let data = BinaryMatrix::from_dataset(ds);
    let mut scores: Vec<f64> = (0..n).flat_map(|_| initial_scores.iter().copied()).collect();
    let mut trees: Vec<Vec<RegressionTree>> = vec![Vec::new(); n_classes];
    let mut loss_trace = vec![mean_loss(&scores, &labels, n_classes)];

    let constraints = TreeConstraints {
        max_depth: Some(params.max_depth),
        min_samples_split: params.min_samples_split,
        min_samples_leaf: params.min_samples_leaf,
        max_features: params.max_features,
    };
    let sample_size = ((params.subsample * n as f64).round() as usize).clamp(1, n);

    // One class: the prior already predicts it with certainty.
    let rounds = if n_classes > 1 { params.n_estimators } else { 0 };
    for round in 0..rounds {
        let rows: Vec<usize> = if sample_size == n {
            (0..n).collect()
        } else {
            let mut rng = SplitMix64::derive(params.seed, &[1, round as u64]);
            let mut rows = rng.sample_indices(n, sample_size);
            rows.sort_unstable();
            rows
        };

        let probabilities: Vec<f64> = scores
            .chunks(n_classes)
            .flat_map(softmax)
            .collect();

        let round_trees: Vec<RegressionTree> = (0..n_classes)
            .into_par_iter()
            .map(|class| {
                let residual: Vec<f64> = (0..n)
                    .map(|i| f64::from(u8::from(labels[i] == class)) - probabilities[i * n_classes + class])
                    .collect();
                let objective = NewtonResidual {
                    residual: &residual,
                    learning_rate: params.learning_rate,
                };
                let mut rng = SplitMix64::derive(params.seed, &[2, round as u64, class as u64]);
                grow(&data, rows.clone(), &constraints, &objective, &mut rng)
            })
            .collect();

        for (i, row_scores) in scores.chunks_mut(n_classes).enumerate() {
            for (class, tree) in round_trees.iter().enumerate() {
                row_scores[class] += *tree.leaf_by(|f| data.bit(i, f));
            }
        }
        for (class, tree) in round_trees.into_iter().enumerate() {
            trees[class].push(tree);
        }
        loss_trace.push(mean_loss(&scores, &labels, n_classes));
    }

    let model = TrainedModel::for_dataset(
        ds,
        ModelPayload::Gbm(GbmModel {
            params: params.clone(),
            initial_scores,
            trees,
        }),
    )?;
    Ok(GbmFit { model, loss_trace })
}

fn mean_loss(scores: &[f64], labels: &[usize], n_classes: usize) -> f64 {
    let total: f64 = scores
        .chunks(n_classes)
        .zip(labels)
        .map(|(s, &y)| log_loss(s, y))
        .sum();
    total / labels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::predict;
    use crate::dataset::SymptomVocabulary;

    fn xor() -> LabeledDataset {
        let vocab = SymptomVocabulary::new(["a", "b"]).unwrap();
        let samples = [([0, 0], 0), ([0, 1], 1), ([1, 0], 1), ([1, 1], 0)]
            .into_iter()
            .map(|(b, y)| (SymptomVector::from_bits(b.to_vec()).unwrap(), y))
            .collect();
        LabeledDataset::new(vocab, samples, vec!["even".into(), "odd".into()]).unwrap()
    }

    #[test]
    fn learns_xor_at_depth_two() {
        let ds = xor();
        let params = GbmParams {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 2,
            subsample: 1.0,
            ..Default::default()
        };
        let model = train_gbm(&ds, &params, ValidationMode::Permissive).unwrap();
        for (x, y) in ds.samples() {
            assert_eq!(predict(&model, x, None).unwrap().top(), Some(*y));
        }
    }

    #[test]
    fn single_class_is_certain() {
        let vocab = SymptomVocabulary::new(["a", "b"]).unwrap();
        let samples = vec![
            (SymptomVector::from_bits(vec![1, 0]).unwrap(), 0),
            (SymptomVector::from_bits(vec![0, 1]).unwrap(), 0),
        ];
        let ds = LabeledDataset::new(vocab, samples, vec!["only".into()]).unwrap();
        let model = train_gbm(&ds, &GbmParams::default(), ValidationMode::Permissive).unwrap();
        for bits in [[0, 0], [1, 1]] {
            let p = predict(&model, &SymptomVector::from_bits(bits.to_vec()).unwrap(), None).unwrap();
            assert_eq!(p.ranked.len(), 1);
            assert_eq!(p.ranked[0].probability, 1.0);
        }
    }

    #[test]
    fn strict_mode_cites_table_range() {
        let params = GbmParams {
            learning_rate: 0.5,
            ..Default::default()
        };
        let err = train_gbm(&xor(), &params, ValidationMode::Strict).unwrap_err();
        assert!(err.to_string().contains("0.01 - 0.1"), "{err}");
    }

    #[test]
    fn zero_rounds_predict_priors() {
        let vocab = SymptomVocabulary::new(["a"]).unwrap();
        let mut samples = Vec::new();
        for (i, y) in [0, 0, 0, 1, 2, 2].into_iter().enumerate() {
            samples.push((SymptomVector::from_bits(vec![(i % 2) as u8]).unwrap(), y));
        }
        let ds = LabeledDataset::new(vocab, samples, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let params = GbmParams {
            n_estimators: 0,
            ..Default::default()
        };
        let model = train_gbm(&ds, &params, ValidationMode::Permissive).unwrap();
        let probs = model.class_probabilities(&SymptomVector::from_bits(vec![1]).unwrap()).unwrap();
        for (p, expected) in probs.iter().zip([0.5, 1.0 / 6.0, 1.0 / 3.0]) {
            assert!((p - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn log_loss_matches_definition() {
        let s = [0.3, -1.2, 2.0];
        let p = softmax(&s);
        assert!((log_loss(&s, 2) + p[2].ln()).abs() < 1e-12);
        let g = log_loss_gradient(&s, 0);
        assert!((g.iter().sum::<f64>()).abs() < 1e-12);
        assert!((g[0] - (p[0] - 1.0)).abs() < 1e-15);
    }
}
