//! Seeded generator of Bernoulli symptom data with known ground truth.
//!
//! Each disease owns a set of characteristic symptoms. A sample of disease
//! `d` shows each characteristic symptom with probability `p_present` and
//! every other symptom with probability `p_noise`, independently. Because
//! the generative model is known exactly, [`GeneratorTruth`] can classify by
//! the true posterior, which bounds the accuracy any learner can reach.

use serde::{Deserialize, Serialize};

use super::names::{disease_name, symptom_name};
use super::{LabeledDataset, SymptomVector, SymptomVocabulary};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_diseases: usize,
    pub n_symptoms: usize,
    pub symptoms_per_disease: usize,
    pub p_present: f64,
    pub p_noise: f64,
    pub samples_per_disease: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The desk-scale benchmark configuration shipped in `data/`.
    pub fn bundled() -> Self {
        Self {
            n_diseases: 40,
            n_symptoms: 130,
            symptoms_per_disease: 6,
            p_present: 0.8,
            p_noise: 0.03,
            samples_per_disease: 120,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, value) in [
            ("n_diseases", self.n_diseases),
            ("n_symptoms", self.n_symptoms),
            ("symptoms_per_disease", self.symptoms_per_disease),
            ("samples_per_disease", self.samples_per_disease),
        ] {
            if value == 0 {
                problems.push(format!("{name} must be at least 1"));
            }
        }
        if self.symptoms_per_disease > self.n_symptoms {
            problems.push(format!(
                "symptoms_per_disease ({}) exceeds n_symptoms ({})",
                self.symptoms_per_disease, self.n_symptoms
            ));
        }
        for (name, p) in [("p_present", self.p_present), ("p_noise", self.p_noise)] {
            if !(0.0..=1.0).contains(&p) {
                problems.push(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }
}

/// True generative parameters of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTruth {
    pub spec: SyntheticSpec,
    pub class_names: Vec<String>,
    /// Characteristic symptom indices per class, ascending.
    pub characteristic: Vec<Vec<usize>>,
}

impl GeneratorTruth {
    /// `P(symptom j present | class)`.
    pub fn feature_probability(&self, class: usize, j: usize) -> f64 {
        if self.characteristic[class].binary_search(&j).is_ok() {
            self.spec.p_present
        } else {
            self.spec.p_noise
        }
    }

    /// Exact `log P(x | class)`; may be `-inf` for impossible vectors.
    pub fn log_likelihood(&self, class: usize, x: &SymptomVector) -> f64 {
        (0..x.len())
            .map(|j| {
                let p = self.feature_probability(class, j);
                if x.get(j) {
                    p.ln()
                } else {
                    (1.0 - p).ln()
                }
            })
            .sum()
    }

    /// Bayes-optimal decision: classes are equiprobable, so the posterior
    /// argmax is the likelihood argmax. Ties go to the lowest class id.
    pub fn oracle_predict(&self, x: &SymptomVector) -> usize {
        let mut best = 0;
        let mut best_ll = f64::NEG_INFINITY;
        for class in 0..self.class_names.len() {
            let ll = self.log_likelihood(class, x);
            if ll > best_ll {
                best = class;
                best_ll = ll;
            }
        }
        best
    }

    /// Fraction of `ds` the oracle labels correctly. `ds` must use the
    /// generator's class ids.
    pub fn oracle_accuracy(&self, ds: &LabeledDataset) -> f64 {
        let correct = ds
            .samples()
            .iter()
            .filter(|(x, y)| self.oracle_predict(x) == *y)
            .count();
        correct as f64 / ds.len() as f64
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(LabeledDataset, GeneratorTruth)> {
    spec.validate()?;
    let vocabulary = SymptomVocabulary::new(
        (0..spec.n_symptoms).map(|i| symptom_name(i, spec.n_symptoms)),
    )?;
    let class_names: Vec<String> = (0..spec.n_diseases)
        .map(|i| disease_name(i, spec.n_diseases))
        .collect();

    let mut pattern_rng = SplitMix64::derive(spec.seed, &[0]);
    let characteristic: Vec<Vec<usize>> = (0..spec.n_diseases)
        .map(|_| {
            let mut s = pattern_rng.sample_indices(spec.n_symptoms, spec.symptoms_per_disease);
            s.sort_unstable();
            s
        })
        .collect();

    let mut sample_rng = SplitMix64::derive(spec.seed, &[1]);
    let mut samples = Vec::with_capacity(spec.n_diseases * spec.samples_per_disease);
    for (class, chars) in characteristic.iter().enumerate() {
        let mut is_char = vec![false; spec.n_symptoms];
        for &j in chars {
            is_char[j] = true;
        }
        for _ in 0..spec.samples_per_disease {
            let bits = is_char
                .iter()
                .map(|&c| {
                    let p = if c { spec.p_present } else { spec.p_noise };
                    u8::from(sample_rng.chance(p))
                })
                .collect();
            samples.push((SymptomVector(bits), class));
        }
    }
    let ds = LabeledDataset::new(vocabulary, samples, class_names.clone())?;
    let truth = GeneratorTruth {
        spec: spec.clone(),
        class_names,
        characteristic,
    };
    Ok((ds, truth))
}
