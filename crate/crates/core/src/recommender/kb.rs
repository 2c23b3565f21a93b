//! Per-disease content tables loaded from five CSV files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KB_FILES: [&str; 5] = [
    "description.csv",
    "precautions.csv",
    "medications.csv",
    "diets.csv",
    "workouts.csv",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KbMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbEntry {
    pub description: String,
    pub precautions: Vec<String>,
    pub medications: Vec<String>,
    pub diets: Vec<String>,
    pub workouts: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    entries: BTreeMap<String, KbEntry>,
}

impl KnowledgeBase {
    pub fn from_entries(entries: BTreeMap<String, KbEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn diseases(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Names are compared exactly after trimming.
    pub fn get(&self, disease: &str) -> Option<&KbEntry> {
        self.entries.get(disease.trim())
    }

    /// Returns the entry and whether it was missing. Lenient mode substitutes
    /// an empty entry; strict mode fails.
    pub fn resolve(&self, disease: &str, mode: KbMode) -> Result<(KbEntry, bool)> {
        match (self.get(disease), mode) {
            (Some(e), _) => Ok((e.clone(), false)),
            (None, KbMode::Lenient) => Ok((KbEntry::default(), true)),
            (None, KbMode::Strict) => Err(Error::MissingKbEntry(disease.to_string())),
        }
    }

    /// Class names without an entry. In strict mode the first one is an error.
    pub fn check_classes(&self, class_names: &[String], mode: KbMode) -> Result<Vec<String>> {
        let missing: Vec<String> = class_names
            .iter()
            .filter(|c| self.get(c).is_none())
            .cloned()
            .collect();
        match (mode, missing.first()) {
            (KbMode::Strict, Some(first)) => Err(Error::MissingKbEntry(first.clone())),
            _ => Ok(missing),
        }
    }
}

/// Rows of one file as disease -> remaining non-empty cells.
fn read_table(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let file_name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes.as_slice());
    let mut rows = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let Some(key) = record.get(0).map(str::trim) else { continue };
        if key.is_empty() {
            continue;
        }
        let cells: Vec<String> = record
            .iter()
            .skip(1)
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(str::to_string)
            .collect();
        if rows.insert(key.to_string(), cells).is_some() {
            return Err(Error::DuplicateKbRow {
                file: file_name,
                disease: key.to_string(),
            });
        }
    }
    Ok(rows)
}

/// A disease listed in any file gets an entry; files that omit it leave the
/// matching field empty.
pub fn load_kb(dir: impl AsRef<Path>) -> Result<KnowledgeBase> {
    let dir = dir.as_ref();
    let tables: Vec<BTreeMap<String, Vec<String>>> = KB_FILES
        .iter()
        .map(|f| read_table(&dir.join(f)))
        .collect::<Result<_>>()?;
    let mut entries: BTreeMap<String, KbEntry> = BTreeMap::new();
    for (i, table) in tables.into_iter().enumerate() {
        for (disease, cells) in table {
            let e = entries.entry(disease).or_default();
            match i {
                0 => e.description = cells.into_iter().next().unwrap_or_default(),
                1 => e.precautions = cells,
                2 => e.medications = cells,
                3 => e.diets = cells,
                _ => e.workouts = cells,
            }
        }
    }
    Ok(KnowledgeBase { entries })
}

/// Writes a knowledge base in the layout `load_kb` reads.
pub fn write_kb(kb: &KnowledgeBase, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let headers = [
        ["disease", "description"].as_slice(),
        &["disease", "precaution"],
        &["disease", "medication"],
        &["disease", "diet"],
        &["disease", "workout"],
    ];
    for (i, file) in KB_FILES.iter().enumerate() {
        let path = dir.join(file);
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(headers[i]).map_err(|e| Error::csv(&path, e))?;
        for (disease, e) in &kb.entries {
            let mut row = vec![disease.as_str()];
            match i {
                0 => row.push(&e.description),
                1 => row.extend(e.precautions.iter().map(String::as_str)),
                2 => row.extend(e.medications.iter().map(String::as_str)),
                3 => row.extend(e.diets.iter().map(String::as_str)),
                _ => row.extend(e.workouts.iter().map(String::as_str)),
            }
            w.write_record(&row).map_err(|e| Error::csv(&path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format {
            path: path.clone(),
            message: e.to_string(),
        })?;
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
