//! CSV ingestion and normalised CSV output.
//!
//! Layout: a header of symptom names followed by a final label column
//! (`prognosis` on output), one row per sample with `0`/`1` cells.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{LabeledDataset, SymptomVector, SymptomVocabulary};
use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "prognosis";

/// Reads a dataset. Class ids follow first appearance of each disease name;
/// row order is preserved.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    parse_dataset(&bytes, path)
}

pub(crate) fn parse_dataset(bytes: &[u8], path: &Path) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.len() < 2 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "header needs at least one symptom column and a label column".into(),
        });
    }
    let n_symptoms = header.len() - 1;
    let vocabulary = SymptomVocabulary::new(header.iter().take(n_symptoms))?;

    let mut class_names: Vec<String> = Vec::new();
    let mut class_index = std::collections::HashMap::new();
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let row = i + 1;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::RowArity {
                row,
                line,
                expected: header.len(),
                found: record.len(),
            });
        }
        let mut bits = Vec::with_capacity(n_symptoms);
        for (col, cell) in record.iter().take(n_symptoms).enumerate() {
            match cell.trim() {
                "0" => bits.push(0),
                "1" => bits.push(1),
                other => {
                    return Err(Error::NonBinaryCell {
                        row,
                        line,
                        column: vocabulary.names()[col].clone(),
                        value: other.to_string(),
                    })
                }
            }
        }
        let label = record[n_symptoms].trim();
        if label.is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("row {row} (line {line}): empty disease label"),
            });
        }
        let id = *class_index.entry(label.to_string()).or_insert_with(|| {
            class_names.push(label.to_string());
            class_names.len() - 1
        });
        samples.push((SymptomVector(bits), id));
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    LabeledDataset::new(vocabulary, samples, class_names)
}

pub fn write_dataset(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_dataset_to(ds, &mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn write_dataset_to<W: Write>(ds: &LabeledDataset, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let to_err = |e: csv::Error| Error::csv("<output>", e);
    let mut header: Vec<&str> = ds.vocabulary().names().iter().map(String::as_str).collect();
    header.push(LABEL_COLUMN);
    writer.write_record(&header).map_err(to_err)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for (x, y) in ds.samples() {
        row.clear();
        row.extend(x.bits().iter().map(|b| b.to_string()));
        row.push(ds.class_names()[*y].clone());
        writer.write_record(&row).map_err(to_err)?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(std::path::PathBuf::from("<output>"), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledDataset> {
        parse_dataset(text.as_bytes(), Path::new("test.csv"))
    }

    #[test]
    fn parses_small_file() {
        let ds = parse("itching,skin_rash,prognosis\n1,1,Fungal\n0,1,Allergy\n").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.class_names(), &["Fungal", "Allergy"]);
        assert_eq!(ds.samples()[1].0.bits(), &[0, 1]);
        assert_eq!(ds.samples()[1].1, 1);
    }

    #[test]
    fn reports_non_binary_cell_position() {
        let err = parse("a,b,prognosis\n1,0,X\n0,1,Y\n0,2,X\n").unwrap_err();
        match err {
            Error::NonBinaryCell {
                row, column, value, ..
            } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
                assert_eq!(value, "2");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("a,b,prognosis\n1,0,X\n0,1,Y\n0,2,X\n")
            .unwrap_err()
            .to_string()
            .contains("row 3"));
    }

    #[test]
    fn rejects_duplicate_columns_and_bad_arity() {
        assert!(matches!(
            parse("a,a,prognosis\n1,0,X\n"),
            Err(Error::DuplicateColumn(c)) if c == "a"
        ));
        assert!(matches!(
            parse("a,b,prognosis\n1,0,X\n1,X\n"),
            Err(Error::RowArity { row: 2, found: 2, .. })
        ));
        assert!(matches!(parse("a,b,prognosis\n"), Err(Error::EmptyDataset)));
    }

    #[test]
    fn missing_and_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.csv");
        assert!(load_dataset(&missing).unwrap_err().is_io());
        let empty = dir.path().join("empty.csv");
        fs::write(&empty, "").unwrap();
        assert!(matches!(load_dataset(&empty), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn write_then_load_is_byte_identical() {
        let text = "itching,skin_rash,prognosis\n1,1,Fungal\n0,1,\"Allergy, seasonal\"\n";
        let ds = parse(text).unwrap();
        let mut out = Vec::new();
        write_dataset_to(&ds, &mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), text);
        let again = parse_dataset(&out, Path::new("x")).unwrap();
        let mut out2 = Vec::new();
        write_dataset_to(&again, &mut out2).unwrap();
        assert_eq!(out, out2);
    }
}
