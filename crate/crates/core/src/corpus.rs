//! Labeled dataset loading, conversion and summary statistics.
//!
//! The canonical on-disk schema is either a JSON array or newline-delimited
//! JSON records, each with `text`, `label` (`"misinformation"` or
//! `"no-misinformation"`), `source` (`"twitter"` or `"facebook"`) and an
//! optional `id`. Files with other layouts go through [`convert_released`].

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Twitter,
    Facebook,
}

impl Source {
    pub const ALL: [Source; 2] = [Source::Twitter, Source::Facebook];

    pub fn index(self) -> usize {
        match self {
            Source::Twitter => 0,
            Source::Facebook => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Twitter => "twitter",
            Source::Facebook => "facebook",
        }
    }

    pub fn parse(s: &str) -> Option<Source> {
        match s.trim().to_ascii_lowercase().as_str() {
            "twitter" => Some(Source::Twitter),
            "facebook" => Some(Source::Facebook),
            _ => None,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Binary annotation. Index 0 is the positive class for AUROC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "misinformation")]
    Misinformation,
    #[serde(rename = "no-misinformation")]
    NoMisinformation,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Misinformation, Label::NoMisinformation];
    pub const COUNT: usize = 2;

    pub fn index(self) -> usize {
        match self {
            Label::Misinformation => 0,
            Label::NoMisinformation => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        match i {
            0 => Label::Misinformation,
            1 => Label::NoMisinformation,
            _ => panic!("label index {i} out of range"),
        }
    }

    /// +1 for the positive class, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Misinformation => 1.0,
            Label::NoMisinformation => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Misinformation => "misinformation",
            Label::NoMisinformation => "no-misinformation",
        }
    }

    /// Accepts the canonical names; `_` and `-` are interchangeable.
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "misinformation" => Some(Label::Misinformation),
            "no-misinformation" => Some(Label::NoMisinformation),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

/// A dataset in which every document is labeled and ids are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    documents: Vec<Document>,
}

impl LabeledDataset {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.label.is_none() {
                return Err(Error::Validation {
                    record: doc.id.clone(),
                    message: "missing label".into(),
                });
            }
            if doc.text.trim().is_empty() {
                return Err(Error::Validation {
                    record: doc.id.clone(),
                    message: "empty text".into(),
                });
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Validation {
                    record: doc.id.clone(),
                    message: "duplicate id".into(),
                });
            }
        }
        Ok(LabeledDataset { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn label_names(&self) -> [&'static str; 2] {
        [Label::Misinformation.as_str(), Label::NoMisinformation.as_str()]
    }

    pub fn labels(&self) -> Vec<Label> {
        self.documents
            .iter()
            .map(|d| d.label.expect("labeled dataset invariant"))
            .collect()
    }

    pub fn label(&self, i: usize) -> Label {
        self.documents[i].label.expect("labeled dataset invariant")
    }

    /// Keep documents from one source (or all when `None`).
    pub fn filter_source(&self, source: Option<Source>) -> LabeledDataset {
        let documents = self
            .documents
            .iter()
            .filter(|d| source.map_or(true, |s| d.source == s))
            .cloned()
            .collect();
        LabeledDataset { documents }
    }

    /// Rewrites every text with `f`. Documents whose text becomes blank keep
    /// an empty string; downstream featurization yields an empty vector.
    pub fn map_text(&self, mut f: impl FnMut(&str) -> String) -> LabeledDataset {
        let documents = self
            .documents
            .iter()
            .map(|d| Document {
                text: f(&d.text),
                ..d.clone()
            })
            .collect();
        LabeledDataset { documents }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.documents).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut body = self.to_json()?;
        body.push('\n');
        fs::write(path, body).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DatasetSchema {
    #[default]
    Canonical,
    /// Any JSON layout handled by [`convert_released`] with auto-detected fields.
    Released,
}

impl DatasetSchema {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "canonical" => Some(DatasetSchema::Canonical),
            "released" => Some(DatasetSchema::Released),
            _ => None,
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, schema: DatasetSchema) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match schema {
        DatasetSchema::Canonical => parse_canonical(&body),
        DatasetSchema::Released => convert_records(&body, &ConvertOptions::default()),
    }
}

pub fn parse_canonical(body: &str) -> Result<LabeledDataset> {
    LabeledDataset::new(parse_documents(body, true)?)
}

/// Canonical-schema documents whose `label` may be absent, e.g. posts to score.
pub fn load_documents(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_documents(&body, false)
}

fn parse_documents(body: &str, require_label: bool) -> Result<Vec<Document>> {
    let records = split_records(body)?;
    let width = id_width(records.len());
    let mut docs = Vec::with_capacity(records.len());
    for (idx, value) in records.into_iter().enumerate() {
        let Value::Object(obj) = value else {
            return Err(Error::Parse {
                location: format!("record {idx}"),
                message: "expected a JSON object".into(),
            });
        };
        let id = match obj.get("id") {
            None | Some(Value::Null) => format!("{idx:0width$}"),
            Some(v) => scalar_string(v).ok_or_else(|| Error::Validation {
                record: format!("#{idx}"),
                message: "id must be a string or number".into(),
            })?,
        };
        let field = |name: &str| -> Result<&str> {
            obj.get(name).and_then(Value::as_str).ok_or_else(|| Error::Validation {
                record: id.clone(),
                message: format!("missing or non-string field `{name}`"),
            })
        };
        let text = field("text")?;
        let source_str = field("source")?;
        let label = match obj.get("label") {
            None | Some(Value::Null) if !require_label => None,
            _ => {
                let label_str = field("label")?;
                Some(Label::parse(label_str).ok_or_else(|| Error::Validation {
                    record: id.clone(),
                    message: format!("unknown label `{label_str}`"),
                })?)
            }
        };
        let source = Source::parse(source_str).ok_or_else(|| Error::Validation {
            record: id.clone(),
            message: format!("unknown source `{source_str}`"),
        })?;
        docs.push(Document {
            id,
            text: text.to_string(),
            source,
            label,
        });
    }
    Ok(docs)
}

fn id_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(5)
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// A JSON array, or one JSON value per non-blank line.
fn split_records(body: &str) -> Result<Vec<Value>> {
    let trimmed = body.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str::<Vec<Value>>(body).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        });
    }
    let mut out = Vec::new();
    for (lineno, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line).map_err(|e| Error::Parse {
            location: format!("line {} (record {})", lineno + 1, out.len()),
            message: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Field-name overrides for [`convert_released`]. `None` means auto-detect.
#[derive(Debug, Clone, Default)]
pub struct ConvertOptions {
    pub text_field: Option<String>,
    pub label_field: Option<String>,
    pub source_field: Option<String>,
    pub id_field: Option<String>,
    /// Used when records carry no source field at all.
    pub default_source: Option<Source>,
}

const TEXT_FIELDS: &[&str] = &[
    "text",
    "post",
    "tweet",
    "message",
    "content",
    "comment",
    "body",
    "full_text",
];
const LABEL_FIELDS: &[&str] = &[
    "label",
    "labels",
    "class",
    "category",
    "annotation",
    "misinformation",
    "target",
];
const SOURCE_FIELDS: &[&str] = &["source", "platform", "origin", "media", "site"];
const ID_FIELDS: &[&str] = &["id", "_id", "post_id", "tweet_id", "uid"];

/// Normalizes the published dataset file (or anything shaped like it) into
/// the canonical document model.
///
/// Accepted layouts: a JSON array of objects, newline-delimited objects, an
/// object wrapping such an array (e.g. `{"data": [...]}`), or a
/// column-oriented object (`{"text": {"0": ..}, "label": {"0": ..}}` or
/// `{"text": [..], "label": [..]}`).
pub fn convert_released(path: impl AsRef<Path>, opts: &ConvertOptions) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    convert_records(&body, opts)
}

pub fn convert_records(body: &str, opts: &ConvertOptions) -> Result<LabeledDataset> {
    let records = released_records(body)?;
    if records.is_empty() {
        return Err(Error::Empty("dataset file holds no records".into()));
    }
    let width = id_width(records.len());
    let mut docs = Vec::with_capacity(records.len());
    for (idx, obj) in records.iter().enumerate() {
        let text_key = pick_field(obj, opts.text_field.as_deref(), TEXT_FIELDS);
        let label_key = pick_field(obj, opts.label_field.as_deref(), LABEL_FIELDS);
        let source_key = pick_field(obj, opts.source_field.as_deref(), SOURCE_FIELDS);
        let id_key = pick_field(obj, opts.id_field.as_deref(), ID_FIELDS);

        let id = id_key
            .and_then(|k| obj.get(k))
            .and_then(scalar_string)
            .unwrap_or_else(|| format!("{idx:0width$}"));
        let text = text_key
            .and_then(|k| obj.get(k))
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Validation {
                record: id.clone(),
                message: "no text field found".into(),
            })?;
        let label_value = label_key.and_then(|k| obj.get(k)).ok_or_else(|| Error::Validation {
            record: id.clone(),
            message: "no label field found".into(),
        })?;
        let label = released_label(label_value).ok_or_else(|| Error::Validation {
            record: id.clone(),
            message: format!("unknown label {label_value}"),
        })?;
        let source = match source_key.and_then(|k| obj.get(k)) {
            Some(v) => released_source(v).ok_or_else(|| Error::Validation {
                record: id.clone(),
                message: format!("unknown source {v}"),
            })?,
            None => opts.default_source.ok_or_else(|| Error::Validation {
                record: id.clone(),
                message: "no source field found and no default source given".into(),
            })?,
        };
        docs.push(Document {
            id,
            text: text.to_string(),
            source,
            label: Some(label),
        });
    }
    LabeledDataset::new(docs)
}

fn released_records(body: &str) -> Result<Vec<Map<String, Value>>> {
    let trimmed = body.trim_start();
    let root = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        match serde_json::from_str::<Value>(body) {
            Ok(v) => v,
            // Not a single document; fall back to one record per line.
            Err(_) if trimmed.starts_with('{') => Value::Array(split_records(body)?),
            Err(e) => {
                return Err(Error::Parse {
                    location: format!("line {} column {}", e.line(), e.column()),
                    message: e.to_string(),
                })
            }
        }
    } else {
        Value::Array(split_records(body)?)
    };
    flatten_root(root)
}

fn flatten_root(root: Value) -> Result<Vec<Map<String, Value>>> {
    match root {
        Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Object(o) => Ok(o),
                _ => Err(Error::Parse {
                    location: format!("record {i}"),
                    message: "expected a JSON object".into(),
                }),
            })
            .collect(),
        Value::Object(obj) => {
            // Wrapper object holding the record array.
            if let Some((_, Value::Array(_))) = obj
                .iter()
                .find(|(_, v)| matches!(v, Value::Array(a) if a.first().is_some_and(Value::is_object)))
            {
                let arr = obj
                    .into_iter()
                    .find_map(|(_, v)| match v {
                        Value::Array(a) if a.first().is_some_and(Value::is_object) => Some(a),
                        _ => None,
                    })
                    .unwrap_or_default();
                return flatten_root(Value::Array(arr));
            }
            columns_to_records(obj)
        }
        _ => Err(Error::Parse {
            location: "root".into(),
            message: "expected a JSON array or object".into(),
        }),
    }
}

/// `{"col": {"0": v, ..}}` or `{"col": [v, ..]}` into row objects.
fn columns_to_records(obj: Map<String, Value>) -> Result<Vec<Map<String, Value>>> {
    let mut rows: Vec<(String, Map<String, Value>)> = Vec::new();
    for (col, values) in obj {
        let cells: Vec<(String, Value)> = match values {
            Value::Object(m) => m.into_iter().collect(),
            Value::Array(a) => a.into_iter().enumerate().map(|(i, v)| (i.to_string(), v)).collect(),
            _ => {
                return Err(Error::Parse {
                    location: format!("column `{col}`"),
                    message: "unrecognized dataset layout".into(),
                })
            }
        };
        for (key, v) in cells {
            let pos = match rows.iter().position(|(k, _)| *k == key) {
                Some(p) => p,
                None => {
                    rows.push((key, Map::new()));
                    rows.len() - 1
                }
            };
            rows[pos].1.insert(col.clone(), v);
        }
    }
    // Pandas writes row keys as integers in string form.
    rows.sort_by(|(a, _), (b, _)| match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    });
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

fn pick_field<'a>(obj: &'a Map<String, Value>, explicit: Option<&str>, candidates: &[&str]) -> Option<&'a str> {
    if let Some(name) = explicit {
        return obj.get_key_value(name).map(|(k, _)| k.as_str());
    }
    candidates.iter().find_map(|cand| {
        obj.keys()
            .find(|k| k.trim().eq_ignore_ascii_case(cand))
            .map(String::as_str)
    })
}

fn released_label(v: &Value) -> Option<Label> {
    match v {
        Value::Bool(true) => Some(Label::Misinformation),
        Value::Bool(false) => Some(Label::NoMisinformation),
        Value::Number(n) => match n.as_i64() {
            Some(1) => Some(Label::Misinformation),
            Some(0) => Some(Label::NoMisinformation),
            _ => None,
        },
        Value::String(s) => {
            let norm: String = s
                .trim()
                .to_ascii_lowercase()
                .chars()
                .map(|c| if c == '_' || c == ' ' { '-' } else { c })
                .collect();
            match norm.as_str() {
                "misinformation" | "misinfo" | "fake" | "false" | "1" | "yes" => Some(Label::Misinformation),
                "no-misinformation" | "not-misinformation" | "non-misinformation" | "nomisinformation"
                | "no-misinfo" | "real" | "true" | "0" | "no" => Some(Label::NoMisinformation),
                _ => None,
            }
        }
        Value::Array(a) if a.len() == 1 => released_label(&a[0]),
        _ => None,
    }
}

fn released_source(v: &Value) -> Option<Source> {
    let s = v.as_str()?.trim().to_ascii_lowercase();
    if s.contains("twitter") || s.contains("tweet") || s == "tw" {
        Some(Source::Twitter)
    } else if s.contains("facebook") || s == "fb" {
        Some(Source::Facebook)
    } else {
        None
    }
}

/// Per-source, per-label counts in the layout of the published statistics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    /// `cross[source][label]`
    pub cross: [[usize; 2]; 2],
    pub by_source: [usize; 2],
    pub by_label: [usize; 2],
    pub total: usize,
}

impl DatasetStats {
    pub fn count(&self, source: Source, label: Label) -> usize {
        self.cross[source.index()][label.index()]
    }

    pub fn source_total(&self, source: Source) -> usize {
        self.by_source[source.index()]
    }

    pub fn label_total(&self, label: Label) -> usize {
        self.by_label[label.index()]
    }

    /// Aligned plain-text table, one column per source plus a total column.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<26}{:>10}{:>10}{:>10}\n",
            "Data", "Twitter", "Facebook", "Total"
        ));
        out.push_str(&format!(
            "{:<26}{:>10}{:>10}{:>10}\n",
            "Annotated data", self.by_source[0], self.by_source[1], self.total
        ));
        for label in Label::ALL {
            let name = match label {
                Label::Misinformation => "With misinformation",
                Label::NoMisinformation => "Without misinformation",
            };
            out.push_str(&format!(
                "{:<26}{:>10}{:>10}{:>10}\n",
                name,
                self.count(Source::Twitter, label),
                self.count(Source::Facebook, label),
                self.label_total(label)
            ));
        }
        out
    }

    /// CSV with columns `source,label,count`, one row per cell.
    pub fn render_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["source", "label", "count"])?;
        for source in Source::ALL {
            for label in Label::ALL {
                w.write_record([source.as_str(), label.as_str(), &self.count(source, label).to_string()])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn compute_stats(ds: &LabeledDataset) -> Result<DatasetStats> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot summarize an empty dataset".into()));
    }
    let mut cross = [[0usize; 2]; 2];
    for (doc, label) in ds.documents().iter().zip(ds.labels()) {
        cross[doc.source.index()][label.index()] += 1;
    }
    let by_source = [cross[0][0] + cross[0][1], cross[1][0] + cross[1][1]];
    let by_label = [cross[0][0] + cross[1][0], cross[0][1] + cross[1][1]];
    Ok(DatasetStats {
        cross,
        by_source,
        by_label,
        total: ds.len(),
    })
}
