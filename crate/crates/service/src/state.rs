use std::collections::BTreeMap;
use std::sync::Arc;

use healthrec_core::recommender::{load_kb, load_profiles, KbMode, ProfileStore};
use healthrec_core::{KnowledgeBase, ModelKind, SimilarityMetric, SymptomVocabulary, TrainedModel};
use tracing::info;

use crate::{ServiceConfig, ServiceError};

#[derive(Debug, Clone)]
pub(crate) struct Inner {
    pub models: BTreeMap<ModelKind, TrainedModel>,
    pub default_kind: ModelKind,
    pub vocabulary: SymptomVocabulary,
    pub kb: KnowledgeBase,
    pub kb_mode: KbMode,
    pub profiles: Option<ProfileStore>,
    pub metric: SimilarityMetric,
    pub top_k: usize,
    pub ignore_unknown: bool,
    pub cors_allowed_origins: Vec<String>,
}

/// Immutable, cheaply cloneable server state.
#[derive(Debug, Clone)]
pub struct AppState(pub(crate) Arc<Inner>);

impl AppState {
    /// Loads models, knowledge base and profile store. In strict KB mode every
    /// class of every model must have an entry.
    pub fn load(config: &ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let mut models = vec![TrainedModel::load(&config.model_path)?];
        for p in &config.additional_models {
            models.push(TrainedModel::load(p)?);
        }
        let kb = load_kb(&config.kb_dir)?;
        let mode = if config.kb_strict { KbMode::Strict } else { KbMode::Lenient };
        for m in &models {
            let missing = kb.check_classes(&m.class_names, mode)?;
            if !missing.is_empty() {
                tracing::warn!("knowledge base lacks {} of the {} model classes", missing.len(), m.kind());
            }
        }
        let vocabulary = models[0].vocabulary()?;
        let profiles = match &config.profile_store {
            None => None,
            Some(p) => {
                let store = load_profiles(p, &vocabulary)?;
                let store = if store.is_empty() {
                    store
                } else {
                    store.with_cohorts(config.cohorts, config.cohort_seed)?
                };
                info!("loaded {} user profiles", store.len());
                Some(store)
            }
        };
        let state = Self::from_parts(
            models,
            config.default_model_kind,
            kb,
            mode,
            profiles,
            config.similarity,
            config.top_k,
            config.ignore_unknown_symptoms,
        )?;
        Ok(state.with_cors(config.cors_allowed_origins.clone()))
    }

    /// Builds state from already loaded parts. All models must share one
    /// vocabulary and carry its names.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        models: Vec<TrainedModel>,
        default_kind: Option<ModelKind>,
        kb: KnowledgeBase,
        kb_mode: KbMode,
        profiles: Option<ProfileStore>,
        metric: SimilarityMetric,
        top_k: usize,
        ignore_unknown: bool,
    ) -> Result<Self, ServiceError> {
        let first = models.first().ok_or_else(|| ServiceError::Config("no model loaded".into()))?;
        let vocabulary = first.vocabulary()?;
        let default_kind = default_kind.unwrap_or(first.kind());
        let mut by_kind = BTreeMap::new();
        for m in models {
            if m.kind() == ModelKind::Kmeans {
                return Err(ServiceError::Config("k-means models cannot serve predictions".into()));
            }
            m.check_vocabulary(&vocabulary)?;
            let kind = m.kind();
            if by_kind.insert(kind, m).is_some() {
                return Err(ServiceError::Config(format!("two {kind} models configured")));
            }
        }
        if !by_kind.contains_key(&default_kind) {
            return Err(ServiceError::Config(format!("default model kind {default_kind} is not loaded")));
        }
        if top_k == 0 {
            return Err(ServiceError::Config("top_k must be at least 1".into()));
        }
        Ok(Self(Arc::new(Inner {
            models: by_kind,
            default_kind,
            vocabulary,
            kb,
            kb_mode,
            profiles,
            metric,
            top_k,
            ignore_unknown,
            cors_allowed_origins: Vec::new(),
        })))
    }

    pub fn with_cors(self, origins: Vec<String>) -> Self {
        let mut inner = Arc::unwrap_or_clone(self.0);
        inner.cors_allowed_origins = origins;
        Self(Arc::new(inner))
    }

    pub fn default_kind(&self) -> ModelKind {
        self.0.default_kind
    }

    pub fn vocabulary(&self) -> &SymptomVocabulary {
        &self.0.vocabulary
    }

    pub fn model(&self, kind: ModelKind) -> Option<&TrainedModel> {
        self.0.models.get(&kind)
    }
}
