//! Symptom-to-disease prediction and health recommendation.
//!
//! The crate is organised bottom-up:
//!
//! * [`dataset`]: symptom vocabularies, multi-hot encoding, CSV I/O, stratified
//!   splitting and a seeded synthetic generator with a Bayes-optimal oracle.
//! * [`classifiers`]: gradient-boosted trees, linear SVM, KNN, Bernoulli naive
//!   Bayes and random forests behind one train/predict contract.
//! * [`clustering`]: k-means used to form patient cohorts.
//! * [`evaluation`]: confusion matrices, accuracy/precision/recall, k-fold
//!   cross-validation and the multi-model comparison report.
//! * [`recommender`]: knowledge-base lookup, similarity metrics and
//!   collaborative / content-based filtering.
//!
//! All randomness flows through [`rng::SplitMix64`] so results are
//! reproducible across platforms.

pub mod classifiers;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod recommender;
pub mod rng;

pub use classifiers::{
    predict, GbmParams, MaxFeatures, ModelKind, ModelSpec, Prediction, RfParams, SvmParams,
    TrainedModel, ValidationMode,
};
pub use clustering::KMeansModel;
pub use dataset::{
    DiseaseLabel, GeneratorTruth, LabeledDataset, SymptomVector, SymptomVocabulary, SyntheticSpec,
};
pub use error::{Error, Result};
pub use recommender::{KnowledgeBase, RecommendationBundle, SimilarityMetric, UserProfile};
