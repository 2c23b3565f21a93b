//! Knowledge-base lookup and similarity-based filtering for predicted diseases.

mod filtering;
mod kb;
mod similarity;

use serde::{Deserialize, Serialize};

pub use filtering::{
    collaborative_recommend, content_based_recommend, disease_profiles, load_profiles, treatment_recommend,
    write_profiles, CollaborativeRanking, Cohorts, DiseaseSupport, ProfileRecord, ProfileStore, TreatmentScore,
    UserProfile,
};
pub use kb::{load_kb, write_kb, KbEntry, KbMode, KnowledgeBase, KB_FILES};
pub use similarity::{similarity, vector_similarity, SimilarityMetric};

use crate::classifiers::Prediction;
use crate::error::{Error, Result};

pub const DISCLAIMER: &str =
    "Informational content only. This is not medical advice; consult a qualified healthcare professional.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationBundle {
    pub disease: String,
    pub probability: f64,
    pub description: String,
    pub precautions: Vec<String>,
    pub medications: Vec<String>,
    pub diets: Vec<String>,
    pub workouts: Vec<String>,
    pub disclaimer: String,
    /// Set when the knowledge base had no entry (lenient mode only).
    pub kb_missing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cohort: Option<usize>,
    /// Similar users who confirmed this disease.
    pub support: usize,
}

impl RecommendationBundle {
    pub fn new(disease: &str, probability: f64, entry: KbEntry, kb_missing: bool) -> Self {
        Self {
            disease: disease.to_string(),
            probability,
            description: entry.description,
            precautions: entry.precautions,
            medications: entry.medications,
            diets: entry.diets,
            workouts: entry.workouts,
            disclaimer: DISCLAIMER.to_string(),
            kb_missing,
            cohort: None,
            support: 0,
        }
    }
}

/// One bundle per ranked class, in prediction order.
pub fn recommend(
    prediction: &Prediction,
    kb: &KnowledgeBase,
    class_names: &[String],
    mode: KbMode,
    collaborative: Option<&CollaborativeRanking>,
) -> Result<Vec<RecommendationBundle>> {
    if prediction.is_empty() {
        return Err(Error::InvalidArgument("empty prediction".into()));
    }
    prediction
        .ranked
        .iter()
        .map(|r| {
            let name = class_names.get(r.class_id).ok_or_else(|| {
                Error::InvalidArgument(format!("class id {} outside {} class names", r.class_id, class_names.len()))
            })?;
            let (entry, missing) = kb.resolve(name, mode)?;
            let mut b = RecommendationBundle::new(name, r.probability, entry, missing);
            if let Some(c) = collaborative {
                b.cohort = c.cohort;
                b.support = c.support_for(name);
            }
            Ok(b)
        })
        .collect()
}
