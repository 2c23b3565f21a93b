//! Classification metrics and the model comparison harness.
//!
//! For a `C`-class confusion matrix (rows = truth, columns = prediction) the
//! one-vs-rest counts of class `c` are `TP = m[c][c]`, `FN = row c - TP`,
//! `FP = column c - TP` and `TN = total - TP - FN - FP`. Accuracy is
//! `trace / total`, which equals `(TP + TN) / (TP + TN + FP + FN)` when
//! `C = 2`. Recall is `TP / (TP + FN)`, precision `TP / (TP + FP)`; every
//! `0 / 0` is reported as 0. Macro averages are unweighted means over classes.

mod harness;

use serde::{Deserialize, Serialize};

use crate::classifiers::{predict, TrainedModel};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

pub use harness::{
    chart_csv, compare_models, cross_validate, stratified_folds, ComparisonReport, ComparisonRow,
    CrossValidation, FoldAssignment, PUBLISHED_REFERENCE_ACCURACY,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[truth][predicted]`.
    pub counts: Vec<Vec<u64>>,
}

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl BinaryCounts {
    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.tp + self.tn + self.fn_ + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        Self {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    pub fn binary_counts(&self, class: usize) -> Result<BinaryCounts> {
        self.check_class(class)?;
        let tp = self.counts[class][class];
        let row: u64 = self.counts[class].iter().sum();
        let col: u64 = self.counts.iter().map(|r| r[class]).sum();
        let fn_ = row - tp;
        let fp = col - tp;
        Ok(BinaryCounts {
            tp,
            fn_,
            fp,
            tn: self.total() - tp - fn_ - fp,
        })
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.n_classes() {
            return Err(Error::InvalidArgument(format!(
                "class id {class} out of range for {} classes",
                self.n_classes()
            )));
        }
        Ok(())
    }
}

pub fn confusion(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::InvalidArgument(format!(
            "truth has {} entries but predictions have {}",
            truth.len(),
            predicted.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::InvalidArgument(format!(
                "class id {} out of range for {n_classes} classes",
                t.max(p)
            )));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.trace(), cm.total())
}

pub fn recall(cm: &ConfusionMatrix, class: usize) -> Result<f64> {
    cm.binary_counts(class).map(|b| b.recall())
}

pub fn precision(cm: &ConfusionMatrix, class: usize) -> Result<f64> {
    cm.binary_counts(class).map(|b| b.precision())
}

pub fn macro_recall(cm: &ConfusionMatrix) -> f64 {
    macro_mean(cm, recall)
}

pub fn macro_precision(cm: &ConfusionMatrix) -> f64 {
    macro_mean(cm, precision)
}

fn macro_mean(cm: &ConfusionMatrix, metric: fn(&ConfusionMatrix, usize) -> Result<f64>) -> f64 {
    let c = cm.n_classes();
    if c == 0 {
        return 0.0;
    }
    (0..c).map(|k| metric(cm, k).expect("in range")).sum::<f64>() / c as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub confusion: ConfusionMatrix,
}

impl EvaluationReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let per_class = (0..confusion.n_classes())
            .map(|c| {
                let b = confusion.binary_counts(c).expect("in range");
                ClassMetrics {
                    precision: b.precision(),
                    recall: b.recall(),
                }
            })
            .collect();
        Self {
            accuracy: accuracy(&confusion),
            per_class,
            macro_precision: macro_precision(&confusion),
            macro_recall: macro_recall(&confusion),
            confusion,
        }
    }
}

/// Top-1 predictions of `model` for every sample of `ds`.
pub fn predict_all(model: &TrainedModel, ds: &LabeledDataset) -> Result<Vec<usize>> {
    ds.samples()
        .iter()
        .map(|(x, _)| predict(model, x, Some(1)).map(|p| p.top().expect("non-empty")))
        .collect()
}

/// Scores a trained model on a labelled dataset.
pub fn evaluate(model: &TrainedModel, ds: &LabeledDataset) -> Result<EvaluationReport> {
    model.check_vocabulary(ds.vocabulary())?;
    if model.class_names != ds.class_names() {
        return Err(Error::InvalidDataset(
            "dataset classes differ from the model's classes".into(),
        ));
    }
    let predicted = predict_all(model, ds)?;
    let cm = confusion(&ds.targets(), &predicted, model.n_classes())?;
    Ok(EvaluationReport::from_confusion(cm))
}
