//! Collaborative filtering over stored user profiles and content-based
//! filtering over per-disease symptom profiles.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::similarity::{vector_similarity, SimilarityMetric};
use crate::clustering::{kmeans_fit_best, KMeansModel};
use crate::dataset::{LabeledDataset, SymptomVector, SymptomVocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserProfile {
    pub user_id: String,
    pub symptoms: SymptomVector,
    pub confirmed_disease: Option<String>,
    /// Treatment ratings, 1 to 5.
    pub ratings: BTreeMap<String, u8>,
}

/// On-disk form of a profile: symptoms by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRecord {
    pub user_id: String,
    pub symptoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed_disease: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ratings: BTreeMap<String, u8>,
}

impl UserProfile {
    pub fn new(
        user_id: impl Into<String>,
        symptoms: SymptomVector,
        confirmed_disease: Option<String>,
        ratings: BTreeMap<String, u8>,
    ) -> Result<Self> {
        if let Some((t, r)) = ratings.iter().find(|(_, r)| !(1..=5).contains(*r)) {
            return Err(Error::InvalidArgument(format!("rating {r} for '{t}' is outside 1-5")));
        }
        Ok(Self {
            user_id: user_id.into(),
            symptoms,
            confirmed_disease,
            ratings,
        })
    }

    pub fn from_record(record: ProfileRecord, vocab: &SymptomVocabulary) -> Result<Self> {
        let symptoms = vocab.encode(&record.symptoms)?;
        Self::new(record.user_id, symptoms, record.confirmed_disease, record.ratings)
    }

    pub fn to_record(&self, vocab: &SymptomVocabulary) -> Result<ProfileRecord> {
        Ok(ProfileRecord {
            user_id: self.user_id.clone(),
            symptoms: vocab.decode(&self.symptoms)?,
            confirmed_disease: self.confirmed_disease.clone(),
            ratings: self.ratings.clone(),
        })
    }
}

/// Cohort model plus the cohort of every stored profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohorts {
    pub model: KMeansModel,
    pub assignments: Vec<usize>,
}

/// Immutable snapshot of user profiles, optionally split into cohorts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileStore {
    profiles: Vec<UserProfile>,
    cohorts: Option<Cohorts>,
}

impl ProfileStore {
    pub fn new(profiles: Vec<UserProfile>) -> Result<Self> {
        if let Some(first) = profiles.first() {
            let n = first.symptoms.len();
            if let Some(p) = profiles.iter().find(|p| p.symptoms.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.symptoms.len(),
                });
            }
        }
        Ok(Self {
            profiles,
            cohorts: None,
        })
    }

    pub fn profiles(&self) -> &[UserProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn cohorts(&self) -> Option<&Cohorts> {
        self.cohorts.as_ref()
    }

    /// Clusters the stored symptom vectors with k-means. `k` is capped at the
    /// number of distinct vectors.
    pub fn with_cohorts(mut self, k: usize, seed: u64) -> Result<Self> {
        if self.profiles.is_empty() {
            return Err(Error::InvalidArgument("cannot form cohorts from an empty store".into()));
        }
        let points: Vec<Vec<f64>> = self.profiles.iter().map(|p| p.symptoms.to_f64()).collect();
        let mut distinct = points.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        distinct.dedup();
        let k = k.clamp(1, distinct.len());
        let fit = kmeans_fit_best(&points, k, 100, seed, 4)?;
        self.cohorts = Some(Cohorts {
            model: fit.model,
            assignments: fit.assignments,
        });
        Ok(self)
    }

    /// Attaches an existing cohort model, assigning every stored profile.
    pub fn with_cohort_model(mut self, model: KMeansModel) -> Result<Self> {
        let assignments = self
            .profiles
            .iter()
            .map(|p| model.assign_vector(&p.symptoms))
            .collect::<Result<_>>()?;
        self.cohorts = Some(Cohorts { model, assignments });
        Ok(self)
    }

    pub fn cohort_of(&self, x: &SymptomVector) -> Result<Option<usize>> {
        self.cohorts.as_ref().map(|c| c.model.assign_vector(x)).transpose()
    }

    /// Profiles searched for `x`: its cohort when cohorts are attached.
    fn candidates(&self, x: &SymptomVector) -> Result<(Option<usize>, Vec<&UserProfile>)> {
        match &self.cohorts {
            None => Ok((None, self.profiles.iter().collect())),
            Some(c) => {
                let id = c.model.assign_vector(x)?;
                let members = self
                    .profiles
                    .iter()
                    .zip(&c.assignments)
                    .filter(|(_, &a)| a == id)
                    .map(|(p, _)| p)
                    .collect();
                Ok((Some(id), members))
            }
        }
    }
}

/// Reads a JSON-lines profile store; blank lines are skipped.
pub fn load_profiles(path: impl AsRef<Path>, vocab: &SymptomVocabulary) -> Result<ProfileStore> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut profiles = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ProfileRecord = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{} line {}", path.display(), i + 1), e))?;
        profiles.push(UserProfile::from_record(record, vocab)?);
    }
    ProfileStore::new(profiles)
}

pub fn write_profiles(store: &ProfileStore, vocab: &SymptomVocabulary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in store.profiles() {
        let line = serde_json::to_string(&p.to_record(vocab)?).map_err(|e| Error::json("profile", e))?;
        out.push_str(&line);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseSupport {
    pub disease: String,
    /// Summed similarity of the supporting users.
    pub weight: f64,
    /// Number of users with positive similarity who confirmed the disease.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollaborativeRanking {
    pub cohort: Option<usize>,
    pub diseases: Vec<DiseaseSupport>,
}

impl CollaborativeRanking {
    pub fn support_for(&self, disease: &str) -> usize {
        self.diseases
            .iter()
            .find(|d| d.disease == disease)
            .map_or(0, |d| d.support)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

/// The query's cohort (if any) and its weighted neighbours.
type Neighbourhood<'a> = (Option<usize>, Vec<(&'a UserProfile, f64)>);

/// Similarities of the candidate users with positive weight.
fn neighbours<'a>(
    x: &SymptomVector,
    store: &'a ProfileStore,
    metric: SimilarityMetric,
) -> Result<Neighbourhood<'a>> {
    if store.is_empty() {
        return Err(Error::InvalidArgument("profile store is empty".into()));
    }
    let (cohort, candidates) = store.candidates(x)?;
    let mut out = Vec::with_capacity(candidates.len());
    for p in candidates {
        let w = vector_similarity(x, &p.symptoms, metric)?;
        if w > 0.0 {
            out.push((p, w));
        }
    }
    Ok((cohort, out))
}

/// Confirmed diseases of similar users ranked by summed similarity; ties by
/// ascending name. Users with non-positive similarity contribute nothing.
pub fn collaborative_recommend(
    x: &SymptomVector,
    store: &ProfileStore,
    metric: SimilarityMetric,
    n: usize,
) -> Result<CollaborativeRanking> {
    check_n(n)?;
    let (cohort, neigh) = neighbours(x, store, metric)?;
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (p, w) in neigh {
        if let Some(d) = &p.confirmed_disease {
            let e = acc.entry(d.as_str()).or_default();
            e.0 += w;
            e.1 += 1;
        }
    }
    let mut diseases: Vec<DiseaseSupport> = acc
        .into_iter()
        .map(|(d, (weight, support))| DiseaseSupport {
            disease: d.to_string(),
            weight,
            support,
        })
        .collect();
    diseases.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.disease.cmp(&b.disease)));
    diseases.truncate(n);
    Ok(CollaborativeRanking { cohort, diseases })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentScore {
    pub treatment: String,
    /// Similarity-weighted mean rating.
    pub score: f64,
    pub raters: usize,
}

/// Treatments rated by similar users ranked by similarity-weighted mean
/// rating; ties by ascending name.
pub fn treatment_recommend(
    x: &SymptomVector,
    store: &ProfileStore,
    metric: SimilarityMetric,
    n: usize,
) -> Result<Vec<TreatmentScore>> {
    check_n(n)?;
    let (_, neigh) = neighbours(x, store, metric)?;
    let mut acc: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
    for (p, w) in neigh {
        for (t, &r) in &p.ratings {
            let e = acc.entry(t.as_str()).or_default();
            e.0 += w * f64::from(r);
            e.1 += w;
            e.2 += 1;
        }
    }
    let mut out: Vec<TreatmentScore> = acc
        .into_iter()
        .map(|(t, (num, den, raters))| TreatmentScore {
            treatment: t.to_string(),
            score: num / den,
            raters,
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.treatment.cmp(&b.treatment)));
    out.truncate(n);
    Ok(out)
}

/// Per-class characteristic vectors: a symptom is on when at least half of
/// the class's training samples show it. Classes without samples are skipped.
pub fn disease_profiles(ds: &LabeledDataset) -> BTreeMap<String, SymptomVector> {
    let d = ds.n_features();
    let mut sums = vec![vec![0usize; d]; ds.n_classes()];
    let counts = ds.class_counts();
    for (x, y) in ds.samples() {
        for j in x.active() {
            sums[*y][j] += 1;
        }
    }
    let mut out = BTreeMap::new();
    for (c, name) in ds.class_names().iter().enumerate() {
        if counts[c] == 0 {
            continue;
        }
        let active: Vec<usize> = (0..d).filter(|&j| 2 * sums[c][j] >= counts[c]).collect();
        out.insert(name.clone(), SymptomVector::from_active(d, &active).expect("in range"));
    }
    out
}

/// Diseases ranked by similarity between `x` and their profile; ties by
/// ascending name.
pub fn content_based_recommend(
    x: &SymptomVector,
    profiles: &BTreeMap<String, SymptomVector>,
    metric: SimilarityMetric,
    n: usize,
) -> Result<Vec<(String, f64)>> {
    check_n(n)?;
    if profiles.is_empty() {
        return Err(Error::InvalidArgument("no disease profiles".into()));
    }
    let mut out = profiles
        .iter()
        .map(|(name, p)| Ok((name.clone(), vector_similarity(x, p, metric)?)))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(n);
    Ok(out)
}
