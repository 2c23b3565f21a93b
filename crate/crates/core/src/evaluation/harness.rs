//! Stratified k-fold cross-validation and the multi-model comparison.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{confusion, ConfusionMatrix, EvaluationReport};
use crate::classifiers::{ModelKind, ModelSpec, ValidationMode};
use crate::dataset::{fnv1a64, LabeledDataset};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Accuracies published for the original, unidentified dataset. They are
/// carried into chart output as a reference column and never compared with
/// local runs.
pub const PUBLISHED_REFERENCE_ACCURACY: [(ModelKind, f64); 5] = [
    (ModelKind::Gbm, 0.95),
    (ModelKind::Nb, 0.92),
    (ModelKind::Svm, 0.90),
    (ModelKind::Rf, 0.88),
    (ModelKind::Knn, 0.85),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub folds: usize,
    /// Test fold of every sample.
    pub fold_of: Vec<usize>,
    /// False when some class had fewer samples than folds and the split fell
    /// back to a plain shuffled k-fold.
    pub stratified: bool,
}

impl FoldAssignment {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }
}

/// Each class is shuffled and dealt round-robin over the folds, continuing
/// from where the previous class stopped so fold sizes stay balanced.
pub fn stratified_folds(ds: &LabeledDataset, folds: usize, seed: u64) -> Result<FoldAssignment> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    if folds > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "{folds} folds exceed the {} available samples",
            ds.len()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let by_class = ds.class_rows();
    let stratified = by_class.iter().all(|rows| rows.is_empty() || rows.len() >= folds);
    let mut fold_of = vec![0; ds.len()];
    if stratified {
        let mut offset = 0;
        for mut rows in by_class {
            rng.shuffle(&mut rows);
            for (pos, &r) in rows.iter().enumerate() {
                fold_of[r] = (offset + pos) % folds;
            }
            offset += rows.len();
        }
    } else {
        let mut rows: Vec<usize> = (0..ds.len()).collect();
        rng.shuffle(&mut rows);
        for (pos, &r) in rows.iter().enumerate() {
            fold_of[r] = pos % folds;
        }
    }
    Ok(FoldAssignment {
        folds,
        fold_of,
        stratified,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub folds: usize,
    pub seed: u64,
    pub stratified: bool,
    pub fold_accuracy: Vec<f64>,
    pub fold_sizes: Vec<usize>,
    /// Metrics of the summed per-fold confusion matrices.
    pub report: EvaluationReport,
    pub train_ms: u64,
    pub infer_ms: u64,
}

impl CrossValidation {
    pub fn mean_accuracy(&self) -> f64 {
        self.fold_accuracy.iter().sum::<f64>() / self.fold_accuracy.len() as f64
    }
}

pub fn cross_validate(
    ds: &LabeledDataset,
    spec: &ModelSpec,
    mode: ValidationMode,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation> {
    let assignment = stratified_folds(ds, folds, seed)?;
    let n_classes = ds.n_classes();
    let mut total = ConfusionMatrix::zeros(n_classes);
    let mut fold_accuracy = Vec::with_capacity(folds);
    let mut fold_sizes = Vec::with_capacity(folds);
    let mut train_ms = 0u128;
    let mut infer_ms = 0u128;

    for fold in 0..folds {
        let train = ds.subset(&assignment.train_rows(fold))?;
        let test = ds.subset(&assignment.test_rows(fold))?;

        let started = Instant::now();
        let model = spec.train(&train, mode)?;
        train_ms += started.elapsed().as_millis();

        let started = Instant::now();
        let predicted = super::predict_all(&model, &test)?;
        infer_ms += started.elapsed().as_millis();

        let cm = confusion(&test.targets(), &predicted, n_classes)?;
        fold_accuracy.push(super::accuracy(&cm));
        fold_sizes.push(test.len());
        total.add(&cm);
    }

    Ok(CrossValidation {
        folds,
        seed,
        stratified: assignment.stratified,
        fold_accuracy,
        fold_sizes,
        report: EvaluationReport::from_confusion(total),
        train_ms: train_ms as u64,
        infer_ms: infer_ms as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    pub params: serde_json::Value,
    /// FNV-1a of the canonical parameter JSON.
    pub params_digest: String,
    pub fold_acc: Vec<f64>,
    pub mean_acc: f64,
    pub macro_p: f64,
    pub macro_r: f64,
    pub train_ms: u64,
    pub infer_ms: u64,
    pub wall_ms: u64,
}

impl ComparisonRow {
    pub fn new(spec: &ModelSpec, cv: &CrossValidation) -> Self {
        let params = spec.params_json();
        let digest = fnv1a64(params.to_string().as_bytes());
        Self {
            kind: spec.kind(),
            params,
            params_digest: format!("{digest:016x}"),
            fold_acc: cv.fold_accuracy.clone(),
            mean_acc: cv.mean_accuracy(),
            macro_p: cv.report.macro_precision,
            macro_r: cv.report.macro_recall,
            train_ms: cv.train_ms,
            infer_ms: cv.infer_ms,
            wall_ms: cv.train_ms + cv.infer_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub folds: usize,
    pub seed: u64,
    pub stratified: bool,
    pub rows: Vec<ComparisonRow>,
}

/// Cross-validates every spec on the same fold assignment.
pub fn compare_models(
    ds: &LabeledDataset,
    specs: &[ModelSpec],
    mode: ValidationMode,
    folds: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("no models to compare".into()));
    }
    let mut rows = Vec::with_capacity(specs.len());
    let mut stratified = true;
    for spec in specs {
        let cv = cross_validate(ds, spec, mode, folds, seed).map_err(|e| Error::InSpec {
            spec: format!("{} {}", spec.kind(), spec.params_json()),
            source: Box::new(e),
        })?;
        stratified &= cv.stratified;
        rows.push(ComparisonRow::new(spec, &cv));
    }
    Ok(ComparisonReport {
        folds,
        seed,
        stratified,
        rows,
    })
}

impl ComparisonReport {
    /// Zeroes every wall-clock field so reports from repeated runs compare
    /// byte for byte.
    pub fn without_timing(mut self) -> Self {
        for row in &mut self.rows {
            row.train_ms = 0;
            row.infer_ms = 0;
            row.wall_ms = 0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Human-readable aligned table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let folds_header: Vec<String> = (1..=self.folds).map(|f| format!("fold{f}")).collect();
        let _ = write!(out, "{:<6} {:>8} {:>8} {:>8}", "model", "mean_acc", "macro_p", "macro_r");
        for h in &folds_header {
            let _ = write!(out, " {h:>7}");
        }
        let _ = writeln!(out, " {:>9}", "wall_ms");
        for row in &self.rows {
            let _ = write!(
                out,
                "{:<6} {:>8.4} {:>8.4} {:>8.4}",
                row.kind.as_str(),
                row.mean_acc,
                row.macro_p,
                row.macro_r
            );
            for acc in &row.fold_acc {
                let _ = write!(out, " {acc:>7.4}");
            }
            let _ = writeln!(out, " {:>9}", row.wall_ms);
        }
        if !self.stratified {
            out.push_str("warning: some class has fewer samples than folds; folds are not stratified\n");
        }
        out
    }
}

fn reference_for(kind: ModelKind) -> Option<f64> {
    PUBLISHED_REFERENCE_ACCURACY
        .iter()
        .find(|(k, _)| *k == kind)
        .map(|(_, v)| *v)
}

/// Bar-chart data: `model,mean_accuracy,paper_reference`.
pub fn chart_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("model,mean_accuracy,paper_reference\n");
    for row in &report.rows {
        let reference = reference_for(row.kind).map(|v| format!("{v:.2}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:.4},{}", row.kind, row.mean_acc, reference);
    }
    out
}
