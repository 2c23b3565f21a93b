//! Symptom vocabularies, multi-hot vectors and labelled datasets.

mod io;
mod names;
mod split;
mod synthetic;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_dataset, write_dataset, write_dataset_to, LABEL_COLUMN};
pub use split::{split, split_indices};
pub use synthetic::{generate_synthetic, GeneratorTruth, SyntheticSpec};

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Canonical form of a symptom name: trimmed, lowercase, whitespace runs
/// collapsed to a single underscore.
pub fn canonical_symptom(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

/// Ordered set of canonical symptom names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SymptomVocabulary {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl SymptomVocabulary {
    /// Builds a vocabulary, canonicalising each name. Duplicate names (after
    /// canonicalisation) and empty input are rejected.
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for name in names {
            let name = canonical_symptom(name.as_ref());
            if name.is_empty() {
                return Err(Error::InvalidArgument("empty symptom name".into()));
            }
            if index.insert(name.clone(), out.len()).is_some() {
                return Err(Error::DuplicateColumn(name));
            }
            out.push(name);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument(
                "vocabulary needs at least one symptom".into(),
            ));
        }
        Ok(Self { names: out, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index
            .get(name)
            .or_else(|| self.index.get(&canonical_symptom(name)))
            .copied()
    }

    /// 64-bit FNV-1a hash of the names joined by `\n`, rendered as 16 hex digits.
    pub fn fingerprint(&self) -> String {
        format!("{:016x}", fnv1a64(self.names.join("\n").as_bytes()))
    }

    /// Multi-hot encoding. Order-insensitive, duplicates are idempotent and
    /// every unknown name is reported in one error.
    pub fn encode<S: AsRef<str>>(&self, names: &[S]) -> Result<SymptomVector> {
        let (vector, unknown) = self.encode_lenient(names);
        if unknown.is_empty() {
            Ok(vector)
        } else {
            Err(Error::UnknownSymptoms(unknown))
        }
    }

    /// Like [`encode`](Self::encode) but returns unknown names instead of
    /// failing. Unknown names are deduplicated in first-seen order.
    pub fn encode_lenient<S: AsRef<str>>(&self, names: &[S]) -> (SymptomVector, Vec<String>) {
        let mut bits = vec![0u8; self.len()];
        let mut unknown: Vec<String> = Vec::new();
        for name in names {
            let name = name.as_ref();
            match self.position(name) {
                Some(i) => bits[i] = 1,
                None => {
                    if !unknown.iter().any(|u| u == name) {
                        unknown.push(name.to_string());
                    }
                }
            }
        }
        (SymptomVector(bits), unknown)
    }

    /// Names of the set bits, in vocabulary order.
    pub fn decode(&self, vector: &SymptomVector) -> Result<Vec<String>> {
        self.check(vector)?;
        Ok(vector.active().map(|i| self.names[i].clone()).collect())
    }

    pub fn check(&self, vector: &SymptomVector) -> Result<()> {
        if vector.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: vector.len(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<String>> for SymptomVocabulary {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<SymptomVocabulary> for Vec<String> {
    fn from(v: SymptomVocabulary) -> Self {
        v.names
    }
}

/// Multi-hot symptom vector; every entry is 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>")]
pub struct SymptomVector(Vec<u8>);

impl SymptomVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "symptom vector entry {pos} is {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self(bits))
    }

    pub fn from_active(len: usize, active: &[usize]) -> Result<Self> {
        let mut bits = vec![0u8; len];
        for &i in active {
            if i >= len {
                return Err(Error::InvalidArgument(format!(
                    "symptom index {i} out of range for length {len}"
                )));
            }
            bits[i] = 1;
        }
        Ok(Self(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| f64::from(b)).collect()
    }
}

impl TryFrom<Vec<u8>> for SymptomVector {
    type Error = Error;

    fn try_from(bits: Vec<u8>) -> Result<Self> {
        Self::from_bits(bits)
    }
}

/// Disease class: contiguous id plus canonical name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiseaseLabel {
    pub id: usize,
    pub name: String,
}

impl fmt::Display for DiseaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name, self.id)
    }
}

/// Symptom vectors with disease labels over a shared vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    vocabulary: SymptomVocabulary,
    samples: Vec<(SymptomVector, usize)>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        vocabulary: SymptomVocabulary,
        samples: Vec<(SymptomVector, usize)>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = std::collections::HashSet::new();
        for name in &class_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate class name '{name}'"
                )));
            }
        }
        for (row, (x, y)) in samples.iter().enumerate() {
            if x.len() != vocabulary.len() {
                return Err(Error::InvalidDataset(format!(
                    "sample {row} has length {}, vocabulary has {}",
                    x.len(),
                    vocabulary.len()
                )));
            }
            if *y >= class_names.len() {
                return Err(Error::InvalidDataset(format!(
                    "sample {row} has class id {y} but only {} classes exist",
                    class_names.len()
                )));
            }
        }
        Ok(Self {
            vocabulary,
            samples,
            class_names,
        })
    }

    pub fn vocabulary(&self) -> &SymptomVocabulary {
        &self.vocabulary
    }

    pub fn samples(&self) -> &[(SymptomVector, usize)] {
        &self.samples
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn labels(&self) -> Vec<DiseaseLabel> {
        self.class_names
            .iter()
            .enumerate()
            .map(|(id, name)| DiseaseLabel {
                id,
                name: name.clone(),
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn targets(&self) -> Vec<usize> {
        self.samples.iter().map(|(_, y)| *y).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for (_, y) in &self.samples {
            counts[*y] += 1;
        }
        counts
    }

    /// Rows grouped by class id; within a class, rows keep dataset order.
    pub fn class_rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n_classes()];
        for (i, (_, y)) in self.samples.iter().enumerate() {
            rows[*y].push(i);
        }
        rows
    }

    /// Dataset restricted to `rows` (in the given order). Class names and
    /// ids are kept as-is so models trained on subsets stay comparable.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let samples = rows.iter().map(|&i| self.samples[i].clone()).collect();
        Self::new(self.vocabulary.clone(), samples, self.class_names.clone())
    }
}
