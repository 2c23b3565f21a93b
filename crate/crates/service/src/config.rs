use std::path::{Path, PathBuf};

use healthrec_core::clustering::DEFAULT_COHORTS;
use healthrec_core::{ModelKind, SimilarityMetric};
use serde::{Deserialize, Serialize};

use crate::ServiceError;

pub const ENV_PREFIX: &str = "HEALTHREC_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    pub model_path: PathBuf,
    /// Further models selectable per request with `"model": kind`.
    pub additional_models: Vec<PathBuf>,
    pub kb_dir: PathBuf,
    pub profile_store: Option<PathBuf>,
    /// Kind used when a request names none. Defaults to the kind of `model_path`.
    pub default_model_kind: Option<ModelKind>,
    pub top_k: usize,
    pub ignore_unknown_symptoms: bool,
    pub cors_allowed_origins: Vec<String>,
    pub kb_strict: bool,
    pub cohorts: usize,
    pub cohort_seed: u64,
    pub similarity: SimilarityMetric,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            model_path: PathBuf::from("model.json"),
            additional_models: Vec::new(),
            kb_dir: PathBuf::from("kb"),
            profile_store: None,
            default_model_kind: None,
            top_k: 5,
            ignore_unknown_symptoms: false,
            cors_allowed_origins: Vec::new(),
            kb_strict: true,
            cohorts: DEFAULT_COHORTS,
            cohort_seed: 0,
            similarity: SimilarityMetric::Cosine,
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ServiceError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(ServiceError::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ServiceError> {
    value
        .trim()
        .parse()
        .map_err(|_| ServiceError::Config(format!("{key}: expected a number, got '{value}'")))
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

impl ServiceConfig {
    /// Reads a JSON config. Relative paths are taken from the config file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ServiceError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.model_path);
        fix(&mut self.kb_dir);
        self.additional_models.iter_mut().for_each(fix);
        if let Some(p) = &mut self.profile_store {
            fix(p);
        }
    }

    /// Applies `HEALTHREC_*` overrides from the process environment.
    pub fn apply_env(&mut self) -> Result<(), ServiceError> {
        self.apply_overrides(std::env::vars())
    }

    /// Applies `HEALTHREC_<FIELD>` overrides from `vars`; other keys are ignored.
    /// List fields take comma-separated values; an empty `PROFILE_STORE` or
    /// `DEFAULT_MODEL_KIND` clears the field.
    pub fn apply_overrides<I, K, V>(&mut self, vars: I) -> Result<(), ServiceError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (key, value) in vars {
            let (key, value) = (key.as_ref(), value.as_ref());
            let Some(field) = key.strip_prefix(ENV_PREFIX) else { continue };
            match field {
                "BIND" => self.bind = value.to_string(),
                "PORT" => self.port = parse_num(key, value)?,
                "MODEL_PATH" => self.model_path = value.into(),
                "ADDITIONAL_MODELS" => {
                    self.additional_models = parse_list(value).into_iter().map(PathBuf::from).collect()
                }
                "KB_DIR" => self.kb_dir = value.into(),
                "PROFILE_STORE" => self.profile_store = (!value.is_empty()).then(|| value.into()),
                "DEFAULT_MODEL_KIND" => {
                    self.default_model_kind = if value.is_empty() {
                        None
                    } else {
                        Some(value.parse().map_err(|e| ServiceError::Config(format!("{key}: {e}")))?)
                    }
                }
                "TOP_K" => self.top_k = parse_num(key, value)?,
                "IGNORE_UNKNOWN_SYMPTOMS" => self.ignore_unknown_symptoms = parse_bool(key, value)?,
                "CORS_ALLOWED_ORIGINS" => self.cors_allowed_origins = parse_list(value),
                "KB_STRICT" => self.kb_strict = parse_bool(key, value)?,
                "COHORTS" => self.cohorts = parse_num(key, value)?,
                "COHORT_SEED" => self.cohort_seed = parse_num(key, value)?,
                "SIMILARITY" => {
                    self.similarity = value.parse().map_err(|e| ServiceError::Config(format!("{key}: {e}")))?
                }
                _ => return Err(ServiceError::Config(format!("unknown setting {key}"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.top_k == 0 {
            return Err(ServiceError::Config("top_k must be at least 1".into()));
        }
        if self.cohorts == 0 {
            return Err(ServiceError::Config("cohorts must be at least 1".into()));
        }
        let mut paths = vec![&self.model_path, &self.kb_dir];
        paths.extend(&self.additional_models);
        paths.extend(&self.profile_store);
        for p in paths {
            if !p.exists() {
                return Err(ServiceError::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn address(&self) -> String {
        format!("{}:{}", self.bind, self.port)
    }
}
