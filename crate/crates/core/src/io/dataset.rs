use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inference::Sample;
use crate::model::AgeScale;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// Line number in the file (the header is line 1).
    pub line: u64,
    pub id: String,
    pub age_at_death: f64,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub sample: Sample,
    pub ids: Vec<String>,
    /// Rows at or below the truncation age, left out of the sample.
    pub rejected: Vec<RejectedRow>,
    /// SHA-256 of the raw file bytes, lowercase hex.
    pub file_sha256: String,
}

#[derive(Deserialize)]
struct Row {
    id: String,
    age_at_death: String,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads `id,age_at_death` rows from a file. See [`ingest_reader`].
pub fn ingest(path: impl AsRef<Path>, scale: &AgeScale) -> Result<Ingested> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::data(None, format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, scale)
}

/// Parses the CSV, converts calendar ages to years since the origin and
/// splits off rows that do not exceed the truncation age.
pub fn ingest_reader<R: Read>(mut reader: R, scale: &AgeScale) -> Result<Ingested> {
    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    let file_sha256 = hex(&Sha256::digest(&raw));
    let text = std::str::from_utf8(&raw).map_err(|e| Error::data(None, format!("input is not UTF-8: {e}")))?;

    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = csv.headers().map_err(|e| Error::data(Some(1), format!("cannot read header: {e}")))?.clone();
    if headers.len() != 2 || &headers[0] != "id" || &headers[1] != "age_at_death" {
        return Err(Error::data(Some(1), format!("expected header `id,age_at_death`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }

    let truncation = scale.truncation_offset();
    let mut seen = std::collections::HashMap::new();
    let mut lifespans = Vec::new();
    let mut ids = Vec::new();
    let mut rejected = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            Error::data(line.map(|l| l as usize), format!("malformed row: {e}"))
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: Row = record
            .deserialize(Some(&headers))
            .map_err(|e| Error::data(Some(line as usize), format!("malformed row: {e}")))?;
        if row.id.is_empty() {
            return Err(Error::data(Some(line as usize), "empty id"));
        }
        let age: f64 = row
            .age_at_death
            .parse()
            .map_err(|_| Error::data(Some(line as usize), format!("age `{}` is not a number", row.age_at_death)))?;
        if !age.is_finite() || age < 0.0 {
            return Err(Error::data(Some(line as usize), format!("age {age} must be finite and >= 0")));
        }
        if let Some(first) = seen.insert(row.id.clone(), line) {
            return Err(Error::data(Some(line as usize), format!("duplicate id `{}` (first on line {first})", row.id)));
        }
        let y = scale.to_offset(age);
        if y <= truncation {
            rejected.push(RejectedRow { line, id: row.id, age_at_death: age });
            continue;
        }
        lifespans.push(y);
        ids.push(row.id);
    }
    if lifespans.is_empty() {
        return Err(Error::data(
            None,
            format!("no usable rows: every age is at or below the truncation age {} ({} rejected)", scale.truncation_age, rejected.len()),
        ));
    }
    let sample = Sample::new(lifespans, truncation)?;
    Ok(Ingested { sample, ids, rejected, file_sha256 })
}

/// Writes a sample back out as `id,age_at_death` CSV.
pub fn write_dataset<W: std::io::Write>(writer: W, ids: &[String], sample: &Sample, scale: &AgeScale) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["id", "age_at_death"]).map_err(csv_err)?;
    for (id, &y) in ids.iter().zip(sample.lifespans()) {
        w.write_record([id.as_str(), &scale.to_age(y).to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest_str(s: &str) -> Result<Ingested> {
        ingest_reader(s.as_bytes(), &AgeScale::default())
    }

    #[test]
    fn converts_ages_and_rejects_below_truncation() {
        let got = ingest_str("id,age_at_death\nA1,97.43\nA2,89.9\r\nA3,90\n").unwrap();
        assert_eq!(got.sample.n(), 1);
        assert!((got.sample.lifespans()[0] - 37.43).abs() < 1e-12);
        assert_eq!(got.sample.truncation(), 30.0);
        assert_eq!(got.rejected.len(), 2);
        assert_eq!(got.rejected[0].line, 3);
        assert_eq!(got.rejected[0].id, "A2");
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let err = ingest_str("id,age_at_death\nA1,97\nA2,abc\n").unwrap_err();
        assert!(matches!(err, Error::Data { row: Some(3), .. }), "{err}");
        let err = ingest_str("id,age_at_death\nA1,97\nA1,98\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = ingest_str("id,age_at_death\nA1,inf\n").unwrap_err();
        assert!(err.is_data_error());
        let err = ingest_str("id,age_at_death\nA1,97,3\n").unwrap_err();
        assert!(err.is_data_error());
        assert!(ingest_str("name,age\nA1,97\n").is_err());
        assert!(ingest_str("id,age_at_death\nA1,80\n").is_err());
    }
}
