//! Hyperparameter types and range validation.
//!
//! Strict mode enforces the typical ranges published for gradient boosting;
//! permissive mode only rejects values that cannot be trained at all.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    Strict,
    #[default]
    Permissive,
}

/// Features considered per split. `auto` is accepted as an alias of `all`;
/// `sqrt` and `log2` round up and never go below one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    #[default]
    #[serde(alias = "auto")]
    All,
    Sqrt,
    Log2,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        let n = n_features as f64;
        let m = match self {
            MaxFeatures::All => return n_features,
            MaxFeatures::Sqrt => n.sqrt().ceil(),
            MaxFeatures::Log2 => n.log2().ceil(),
        };
        (m as usize).clamp(1, n_features.max(1))
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" | "auto" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "log2" => Ok(MaxFeatures::Log2),
            other => Err(format!("unknown max_features '{other}' (all, auto, sqrt, log2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbmParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub subsample: f64,
    pub max_features: MaxFeatures,
    pub seed: u64,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
            min_samples_leaf: 1,
            subsample: 1.0,
            max_features: MaxFeatures::All,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamViolation {
    pub field: String,
    pub value: String,
    pub expected: String,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} = {} is outside the allowed range {}",
            self.field, self.value, self.expected
        )
    }
}

pub(crate) fn violation(field: &str, value: impl fmt::Display, expected: &str) -> ParamViolation {
    ParamViolation {
        field: field.to_string(),
        value: value.to_string(),
        expected: expected.to_string(),
    }
}

/// Checks every field and returns all violations (empty when valid).
pub fn validate_gbm(params: &GbmParams, mode: ValidationMode) -> Vec<ParamViolation> {
    let mut out = Vec::new();
    let p = params;
    match mode {
        ValidationMode::Strict => {
            if !(100..=500).contains(&p.n_estimators) {
                out.push(violation("n_estimators", p.n_estimators, "100-500"));
            }
            if !(0.01..=0.1).contains(&p.learning_rate) {
                out.push(violation("learning_rate", p.learning_rate, "0.01 - 0.1"));
            }
            if !(3..=7).contains(&p.max_depth) {
                out.push(violation("max_depth", p.max_depth, "3 - 7"));
            }
            if !(2..=10).contains(&p.min_samples_split) {
                out.push(violation("min_samples_split", p.min_samples_split, "2 - 10"));
            }
            if !(1..=5).contains(&p.min_samples_leaf) {
                out.push(violation("min_samples_leaf", p.min_samples_leaf, "1 - 5"));
            }
            if !(0.5..=1.0).contains(&p.subsample) {
                out.push(violation("subsample", p.subsample, "0.5 - 1.0"));
            }
        }
        ValidationMode::Permissive => {
            // n_estimators = 0 is the prior-only baseline and stays legal.
            if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
                out.push(violation("learning_rate", p.learning_rate, "> 0"));
            }
            if p.max_depth == 0 {
                out.push(violation("max_depth", p.max_depth, ">= 1"));
            }
            if p.min_samples_split == 0 {
                out.push(violation("min_samples_split", p.min_samples_split, ">= 1"));
            }
            if p.min_samples_leaf == 0 {
                out.push(violation("min_samples_leaf", p.min_samples_leaf, ">= 1"));
            }
            if !(p.subsample > 0.0 && p.subsample <= 1.0) {
                out.push(violation("subsample", p.subsample, "(0, 1]"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mid_range() -> GbmParams {
        GbmParams {
            n_estimators: 300,
            learning_rate: 0.05,
            max_depth: 5,
            min_samples_split: 4,
            min_samples_leaf: 2,
            subsample: 0.8,
            max_features: MaxFeatures::Sqrt,
            seed: 0,
        }
    }

    #[test]
    fn mid_range_is_valid_in_strict_mode() {
        assert!(validate_gbm(&mid_range(), ValidationMode::Strict).is_empty());
    }

    #[test]
    fn max_depth_violation_cites_range() {
        let p = GbmParams {
            max_depth: 9,
            ..mid_range()
        };
        let v = validate_gbm(&p, ValidationMode::Strict);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "max_depth");
        assert_eq!(v[0].expected, "3 - 7");
    }

    #[test]
    fn strict_reports_every_violation() {
        let p = GbmParams {
            n_estimators: 50,
            learning_rate: 0.5,
            max_depth: 1,
            min_samples_split: 20,
            min_samples_leaf: 9,
            subsample: 0.2,
            ..mid_range()
        };
        let fields: Vec<String> = validate_gbm(&p, ValidationMode::Strict)
            .into_iter()
            .map(|v| v.field)
            .collect();
        assert_eq!(
            fields,
            [
                "n_estimators",
                "learning_rate",
                "max_depth",
                "min_samples_split",
                "min_samples_leaf",
                "subsample"
            ]
        );
    }

    #[test]
    fn permissive_accepts_large_learning_rate() {
        let p = GbmParams {
            learning_rate: 0.3,
            ..mid_range()
        };
        assert!(validate_gbm(&p, ValidationMode::Permissive).is_empty());
        assert_eq!(validate_gbm(&p, ValidationMode::Strict).len(), 1);
        let bad = GbmParams {
            learning_rate: 0.0,
            subsample: 1.5,
            ..mid_range()
        };
        assert_eq!(validate_gbm(&bad, ValidationMode::Permissive).len(), 2);
    }

    #[test]
    fn max_features_counts() {
        assert_eq!(MaxFeatures::All.count(130), 130);
        assert_eq!(MaxFeatures::Sqrt.count(130), 12);
        assert_eq!(MaxFeatures::Log2.count(130), 8);
        assert_eq!(MaxFeatures::Sqrt.count(1), 1);
        assert_eq!(MaxFeatures::Log2.count(1), 1);
        let auto: MaxFeatures = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(auto, MaxFeatures::All);
    }
}
