//! Tokenization, word n-grams and sparse bag-of-n-grams vectors.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGramConfig {
    /// Longest n-gram; every shorter order is included too.
    pub max_n: usize,
    pub min_doc_frequency: usize,
    /// Presence indicators instead of occurrence counts.
    pub binary_features: bool,
}

impl NGramConfig {
    pub fn new(max_n: usize) -> Result<Self> {
        let cfg = NGramConfig {
            max_n,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.max_n) {
            return Err(Error::param(format!("max_n must be 1, 2 or 3 (got {})", self.max_n)));
        }
        if self.min_doc_frequency == 0 {
            return Err(Error::param("min_doc_frequency must be at least 1"));
        }
        Ok(())
    }
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            max_n: 1,
            min_doc_frequency: 1,
            binary_features: true,
        }
    }
}

/// Whitespace tokenizer for cleaned text. Hashtags stay whole.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

/// All contiguous k-grams for k = 1..=max_n, grouped by k, left to right.
pub fn extract_ngrams<S: AsRef<str>>(tokens: &[S], max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for k in 1..=max_n.max(1) {
        if k > tokens.len() {
            break;
        }
        for window in tokens.windows(k) {
            let mut gram = String::new();
            for (i, t) in window.iter().enumerate() {
                if i > 0 {
                    gram.push(' ');
                }
                gram.push_str(t.as_ref());
            }
            out.push(gram);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dim: usize,
}

impl SparseVector {
    /// Entries must be strictly increasing in index, nonzero, and below `dim`.
    pub fn new(entries: Vec<(usize, f64)>, dim: usize) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::param("sparse indices must be strictly increasing"));
            }
        }
        if let Some(&(i, _)) = entries.last() {
            if i >= dim {
                return Err(Error::param(format!("index {i} out of range for dimension {dim}")));
            }
        }
        if entries.iter().any(|&(_, v)| v == 0.0 || !v.is_finite()) {
            return Err(Error::param("sparse values must be finite and nonzero"));
        }
        Ok(SparseVector { entries, dim })
    }

    /// Sorts, sums duplicate indices and drops zeros.
    pub fn from_unsorted(mut entries: Vec<(usize, f64)>, dim: usize) -> Self {
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!(i < dim, "index {i} out of range for dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        SparseVector { entries: merged, dim }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        SparseVector {
            entries,
            dim: values.len(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Dot product with a dense vector; indices past its end count as zero.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .filter_map(|&(i, v)| dense.get(i).map(|w| w * v))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }
}

impl Serialize for SparseVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            dim: usize,
            entries: &'a [(usize, f64)],
        }
        Repr {
            dim: self.dim,
            entries: &self.entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            dim: usize,
            entries: Vec<(usize, f64)>,
        }
        let r = Repr::deserialize(d)?;
        SparseVector::new(r.entries, r.dim).map_err(serde::de::Error::custom)
    }
}

/// Rows of equal dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<SparseVector>,
    dim: usize,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<SparseVector>, dim: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        Ok(FeatureMatrix { rows, dim })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        FeatureMatrix::new(rows.iter().map(|r| SparseVector::from_dense(r)).collect(), dim)
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            dim: self.dim,
        }
    }

    /// Column-major view: for each feature, the `(row, value)` pairs.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            for (f, v) in row.iter() {
                cols[f].push((r, v));
            }
        }
        cols
    }
}

/// N-gram to feature index map built from a training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
    index: HashMap<String, usize>,
    config: NGramConfig,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    config: NGramConfig,
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            terms: r.terms,
            doc_frequency: r.doc_frequency,
            index,
            config: r.config,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            config: v.config,
            terms: v.terms,
            doc_frequency: v.doc_frequency,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn config(&self) -> &NGramConfig {
        &self.config
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn doc_frequency(&self, index: usize) -> usize {
        self.doc_frequency[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, usize)> + '_ {
        self.terms
            .iter()
            .zip(&self.doc_frequency)
            .enumerate()
            .map(|(i, (t, &df))| (i, t.as_str(), df))
    }

    /// CSV with columns `ngram,index,doc_frequency`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["ngram", "index", "doc_frequency"])?;
        for (i, term, df) in self.iter() {
            w.write_record([term, &i.to_string(), &df.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Builds the vocabulary from tokenized documents. Indices follow first
/// occurrence over the corpus scan, restricted to n-grams meeting the
/// document-frequency threshold.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>], config: &NGramConfig) -> Result<Vocabulary> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::Empty("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut order: Vec<String> = Vec::new();
    let mut df: HashMap<String, usize> = HashMap::new();
    for tokens in docs {
        let mut in_doc: HashSet<String> = HashSet::new();
        for g in extract_ngrams(tokens, config.max_n) {
            if in_doc.contains(&g) {
                continue;
            }
            match df.get_mut(&g) {
                Some(f) => *f += 1,
                None => {
                    df.insert(g.clone(), 1);
                    order.push(g.clone());
                }
            }
            in_doc.insert(g);
        }
    }
    let mut terms = Vec::new();
    let mut doc_frequency = Vec::new();
    for term in order {
        let f = df[&term];
        if f >= config.min_doc_frequency {
            terms.push(term);
            doc_frequency.push(f);
        }
    }
    let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary {
        terms,
        doc_frequency,
        index,
        config: *config,
    })
}

/// Maps tokens onto the vocabulary; unknown n-grams are dropped.
pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for g in extract_ngrams(tokens, vocab.config.max_n) {
        if let Some(i) = vocab.index_of(&g) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let binary = vocab.config.binary_features;
    let entries = counts
        .into_iter()
        .map(|(i, c)| (i, if binary { 1.0 } else { c }))
        .collect();
    SparseVector::from_unsorted(entries, vocab.len())
}

pub fn vectorize_all<S: AsRef<str>>(docs: &[Vec<S>], vocab: &Vocabulary) -> FeatureMatrix {
    FeatureMatrix {
        rows: docs.iter().map(|d| vectorize(d, vocab)).collect(),
        dim: vocab.len(),
    }
}

/// Tokenizes every (already cleaned) document text.
pub fn tokenize_dataset(ds: &LabeledDataset) -> Vec<Vec<String>> {
    ds.documents().iter().map(|d| tokenize(&d.text)).collect()
}

/// One line per document: the label index (0 = misinformation) followed by
/// `index:value` pairs in ascending index order.
pub fn sparse_text(matrix: &FeatureMatrix, labels: &[Label]) -> String {
    let mut out = String::new();
    for (row, label) in matrix.rows().iter().zip(labels) {
        out.push_str(&label.index().to_string());
        for (i, v) in row.iter() {
            let _ = write!(out, " {i}:{v}");
        }
        out.push('\n');
    }
    out
}
