//! Labeled news corpora and file ingestion.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_text;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: field `{field}` not present in header", path.display())]
    MissingColumn { path: PathBuf, field: String },
    #[error("no usable rows in {} ({} rows dropped)", path.display(), stats.dropped())]
    Empty { path: PathBuf, stats: IngestStats },
    #[error("duplicate id `{0}` in corpus")]
    DuplicateId(String),
    #[error("item `{0}` has empty text")]
    EmptyText(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    /// Accepts `true/real/1` and `false/fake/0`, case-insensitively.
    pub fn parse_loose(raw: &str) -> Option<Label> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "true" | "real" | "1" => Some(Label::Real),
            "false" | "fake" | "0" => Some(Label::Fake),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
        }
    }

    /// 1 for Fake, 0 for Real.
    pub fn target(self) -> f64 {
        match self {
            Label::Fake => 1.0,
            Label::Real => 0.0,
        }
    }

    /// Fake iff `p_fake >= 0.5`.
    pub fn from_probability(p_fake: f64) -> Label {
        if p_fake >= 0.5 {
            Label::Fake
        } else {
            Label::Real
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "coaid")]
    CoAid,
    #[serde(rename = "c19rumor")]
    C19Rumor,
    #[serde(rename = "other")]
    Other,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::CoAid => "coaid",
            Source::C19Rumor => "c19rumor",
            Source::Other => "other",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "coaid" => Ok(Source::CoAid),
            "c19rumor" | "c19" => Ok(Source::C19Rumor),
            "other" => Ok(Source::Other),
            _ => Err(format!("unknown source `{s}`")),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsItem {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub source: Source,
}

/// An ordered, immutable collection of items with distinct ids.
///
/// Corpora produced by oversampling may repeat an id; those are built through
/// [`Corpus::from_items_allow_repeats`] and never pass back through ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    name: String,
    items: Vec<NewsItem>,
}

impl Corpus {
    /// Build a corpus, rejecting duplicate ids and empty texts.
    pub fn new(name: impl Into<String>, items: Vec<NewsItem>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(items.len());
        for item in &items {
            if item.text.is_empty() {
                return Err(CorpusError::EmptyText(item.id.clone()));
            }
            if !seen.insert(item.id.as_str()) {
                return Err(CorpusError::DuplicateId(item.id.clone()));
            }
        }
        Ok(Corpus {
            name: name.into(),
            items,
        })
    }

    pub fn from_items_allow_repeats(name: impl Into<String>, items: Vec<NewsItem>) -> Self {
        Corpus {
            name: name.into(),
            items,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[NewsItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.items.iter().filter(|i| i.label == label).count()
    }

    pub fn real_count(&self) -> usize {
        self.count(Label::Real)
    }

    pub fn fake_count(&self) -> usize {
        self.count(Label::Fake)
    }

    pub fn has_both_classes(&self) -> bool {
        self.real_count() > 0 && self.fake_count() > 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &NewsItem> {
        self.items.iter()
    }

    pub fn distinct_ids(&self) -> HashSet<&str> {
        self.items.iter().map(|i| i.id.as_str()).collect()
    }

    /// Write one JSON object per line using the keys `id`, `text`, `label`, `source`.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), CorpusError> {
        let io = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        for item in &self.items {
            serde_json::to_writer(&mut w, item).map_err(|e| io(e.into()))?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Read a file written by [`Corpus::write_jsonl`]. Repeated ids are kept,
    /// since oversampled splits legitimately contain them.
    pub fn read_jsonl(path: &Path, name: impl Into<String>) -> Result<Self, CorpusError> {
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut items = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| CorpusError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let item: NewsItem = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })?;
            items.push(item);
        }
        Ok(Corpus::from_items_allow_repeats(name, items))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        path.extension()?.to_str()?.parse().ok()
    }
}

/// Column (CSV) or key (JSONL) names for the fields of a [`NewsItem`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMapping {
    pub text: String,
    pub label: String,
    /// Absent ids are synthesized as `{source}-{row_index}`.
    pub id: Option<String>,
    pub source: Source,
}

impl FieldMapping {
    pub fn new(text: &str, label: &str, source: Source) -> Self {
        FieldMapping {
            text: text.to_string(),
            label: label.to_string(),
            id: None,
            source,
        }
    }

    pub fn with_id(mut self, id: &str) -> Self {
        self.id = Some(id.to_string());
        self
    }

    /// `id`, `text`, `label` keys, matching [`Corpus::write_jsonl`].
    pub fn standard(source: Source) -> Self {
        FieldMapping::new("text", "label", source).with_id("id")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub rows_read: usize,
    pub dropped_empty_text: usize,
    pub dropped_bad_label: usize,
    pub duplicate_ids: usize,
}

impl IngestStats {
    pub fn dropped(&self) -> usize {
        self.dropped_empty_text + self.dropped_bad_label + self.duplicate_ids
    }
}

struct RawRow {
    id: Option<String>,
    text: Option<String>,
    label: Option<String>,
}

/// Read a labeled corpus from a CSV or JSONL file.
///
/// Rows with empty normalized text or an unrecognized label are dropped and
/// counted; later rows repeating an earlier id are dropped as duplicates.
pub fn ingest(
    path: &Path,
    format: Format,
    mapping: &FieldMapping,
) -> Result<(Corpus, IngestStats), CorpusError> {
    let rows = match format {
        Format::Csv => read_csv(path, mapping)?,
        Format::Jsonl => read_jsonl(path, mapping)?,
    };
    let mut stats = IngestStats {
        rows_read: rows.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for (index, row) in rows.into_iter().enumerate() {
        let text = normalize_text(row.text.as_deref().unwrap_or(""));
        if text.is_empty() {
            stats.dropped_empty_text += 1;
            continue;
        }
        let Some(label) = row.label.as_deref().and_then(Label::parse_loose) else {
            stats.dropped_bad_label += 1;
            continue;
        };
        let id = match row.id.filter(|s| !s.trim().is_empty()) {
            Some(id) => id.trim().to_string(),
            None => format!("{}-{index}", mapping.source),
        };
        if !seen.insert(id.clone()) {
            stats.duplicate_ids += 1;
            continue;
        }
        items.push(NewsItem {
            id,
            text,
            label,
            source: mapping.source,
        });
    }
    if items.is_empty() {
        return Err(CorpusError::Empty {
            path: path.to_path_buf(),
            stats,
        });
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("corpus")
        .to_string();
    Ok((Corpus { name, items }, stats))
}

fn read_csv(path: &Path, mapping: &FieldMapping) -> Result<Vec<RawRow>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |field: &str| {
        headers
            .iter()
            .position(|h| h.trim() == field)
            .ok_or_else(|| CorpusError::MissingColumn {
                path: path.to_path_buf(),
                field: field.to_string(),
            })
    };
    let text_col = column(&mapping.text)?;
    let label_col = column(&mapping.label)?;
    let id_col = mapping.id.as_deref().map(column).transpose()?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        rows.push(RawRow {
            id: id_col.and_then(|c| record.get(c)).map(str::to_string),
            text: record.get(text_col).map(str::to_string),
            label: record.get(label_col).map(str::to_string),
        });
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> CorpusError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CorpusError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

fn json_field(value: &serde_json::Value, key: &str) -> Option<String> {
    match value.get(key)? {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn read_jsonl(path: &Path, mapping: &FieldMapping) -> Result<Vec<RawRow>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })?;
        rows.push(RawRow {
            id: mapping.id.as_deref().and_then(|k| json_field(&value, k)),
            text: json_field(&value, &mapping.text),
            label: json_field(&value, &mapping.label),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let path = dir.path().join(name);
        File::create(&path)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        path
    }

    #[test]
    fn csv_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.csv",
            "headline,verdict\ncovid cures exist,fake\nwho issues guidance,real\n",
        );
        let (c, stats) = ingest(
            &p,
            Format::Csv,
            &FieldMapping::new("headline", "verdict", Source::Other),
        )
        .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!((c.fake_count(), c.real_count()), (1, 1));
        assert_eq!(c.items()[0].id, "other-0");
        assert_eq!(stats.dropped(), 0);
    }

    #[test]
    fn empty_text_row_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "text,label\n\"\",fake\n");
        let m = FieldMapping::new("text", "label", Source::Other);
        match ingest(&p, Format::Csv, &m) {
            Err(CorpusError::Empty { stats, .. }) => {
                assert_eq!(stats.dropped_empty_text, 1);
                assert_eq!(stats.rows_read, 1);
            }
            other => panic!("expected empty-corpus error, got {other:?}"),
        }
        let p = write(&dir, "b.csv", "text,label\n\"\",fake\nok,real\n");
        let (c, stats) = ingest(&p, Format::Csv, &m).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(stats.dropped_empty_text, 1);
    }

    #[test]
    fn label_vocabulary_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let body = [
            r#"{"id":"a","t":"x","l":"TRUE"}"#,
            r#"{"id":"b","t":"y","l":"False"}"#,
            r#"{"id":"c","t":"z","l":1}"#,
            r#"{"id":"d","t":"w","l":"maybe"}"#,
            r#"{"id":"a","t":"again","l":"fake"}"#,
        ]
        .join("\n");
        let p = write(&dir, "x.jsonl", &body);
        let m = FieldMapping::new("t", "l", Source::CoAid).with_id("id");
        let (c, stats) = ingest(&p, Format::Jsonl, &m).unwrap();
        let labels: Vec<_> = c.iter().map(|i| i.label).collect();
        assert_eq!(labels, [Label::Real, Label::Fake, Label::Real]);
        assert_eq!(stats.dropped_bad_label, 1);
        assert_eq!(stats.duplicate_ids, 1);
    }

    #[test]
    fn unreadable_and_malformed_files() {
        let m = FieldMapping::standard(Source::Other);
        assert!(matches!(
            ingest(Path::new("/nonexistent/x.jsonl"), Format::Jsonl, &m),
            Err(CorpusError::Io { .. })
        ));
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "bad.jsonl", "{not json}\n");
        assert!(matches!(
            ingest(&p, Format::Jsonl, &m),
            Err(CorpusError::Parse { line: 1, .. })
        ));
        let p = write(&dir, "nocol.csv", "body,label\nx,fake\n");
        assert!(matches!(
            ingest(&p, Format::Csv, &m),
            Err(CorpusError::MissingColumn { .. })
        ));
    }

    #[test]
    fn write_then_ingest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "in.csv",
            "id,text,label\nq1,Masks   WORK,real\nq2,see http://a.b/c,false\n",
        );
        let m = FieldMapping::standard(Source::C19Rumor);
        let (c, _) = ingest(&p, Format::Csv, &m).unwrap();
        let out = dir.path().join("in.jsonl");
        c.write_jsonl(&out).unwrap();
        let (again, _) = ingest(&out, Format::Jsonl, &m).unwrap();
        assert_eq!(c.items(), again.items());
    }

    #[test]
    fn constructor_enforces_invariants() {
        let item = |id: &str, text: &str| NewsItem {
            id: id.into(),
            text: text.into(),
            label: Label::Real,
            source: Source::Other,
        };
        assert!(matches!(
            Corpus::new("c", vec![item("a", "x"), item("a", "y")]),
            Err(CorpusError::DuplicateId(_))
        ));
        assert!(matches!(
            Corpus::new("c", vec![item("a", "")]),
            Err(CorpusError::EmptyText(_))
        ));
    }
}
