use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::SymptomVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMetric {
    #[default]
    Cosine,
    Jaccard,
    Pearson,
}

impl SimilarityMetric {
    pub const ALL: [SimilarityMetric; 3] = [Self::Cosine, Self::Jaccard, Self::Pearson];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cosine => "cosine",
            Self::Jaccard => "jaccard",
            Self::Pearson => "pearson",
        }
    }
}

impl fmt::Display for SimilarityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" => Ok(Self::Cosine),
            "jaccard" => Ok(Self::Jaccard),
            "pearson" => Ok(Self::Pearson),
            other => Err(Error::InvalidArgument(format!(
                "unknown similarity metric '{other}' (expected cosine, jaccard or pearson)"
            ))),
        }
    }
}

/// Degenerate inputs (a zero vector for cosine, a constant vector for
/// Pearson, an empty union for Jaccard) score 0.
pub fn similarity(u: &[f64], v: &[f64], metric: SimilarityMetric) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(match metric {
        SimilarityMetric::Cosine => cosine(u, v),
        SimilarityMetric::Jaccard => jaccard(u, v),
        SimilarityMetric::Pearson => pearson(u, v),
    })
}

pub fn vector_similarity(u: &SymptomVector, v: &SymptomVector, metric: SimilarityMetric) -> Result<f64> {
    similarity(&u.to_f64(), &v.to_f64(), metric)
}

fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum();
    let nv: f64 = v.iter().map(|b| b * b).sum();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu * nv).sqrt()).clamp(-1.0, 1.0)
}

fn jaccard(u: &[f64], v: &[f64]) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (a, b) in u.iter().zip(v) {
        let (a, b) = (*a != 0.0, *b != 0.0);
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn pearson(u: &[f64], v: &[f64]) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let cu: Vec<f64> = u.iter().map(|a| a - mu).collect();
    let cv: Vec<f64> = v.iter().map(|b| b - mv).collect();
    cosine(&cu, &cv)
}
