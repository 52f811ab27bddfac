//! LDA topic modeling by collapsed Gibbs sampling, plus perplexity and
//! word-frequency exports.
//!
//! Perplexities from this sampler are not comparable to numbers produced by
//! online variational inference; they are reported for relative comparisons.

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / K`, `beta = 0.01`, 1000 sweeps.
    pub fn new(num_topics: usize, seed: u64) -> Self {
        LdaConfig {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_topics == 0 {
            return Err(Error::param("num_topics must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::param("alpha and beta must be positive"));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig::new(10, 100)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub config: LdaConfig,
    /// Word types in first-occurrence order.
    pub vocab: Vec<String>,
    /// `topic_word[k][w]`
    pub topic_word: Vec<Vec<u32>>,
    pub topic_totals: Vec<u32>,
    /// `doc_topic[d][k]`
    pub doc_topic: Vec<Vec<u32>>,
    /// Word id of every token.
    pub docs: Vec<Vec<usize>>,
    /// Topic of every token.
    pub assignments: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TopicModel {
    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        if self.index.is_empty() && !self.vocab.is_empty() {
            return self.vocab.iter().position(|v| v == word);
        }
        self.index.get(word).copied()
    }

    /// Smoothed `p(word | topic)`.
    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        let v = self.vocab.len() as f64;
        (self.topic_word[topic][word] as f64 + self.config.beta)
            / (self.topic_totals[topic] as f64 + v * self.config.beta)
    }

    /// Smoothed `p(topic | training document)`.
    pub fn theta(&self, doc: usize, topic: usize) -> f64 {
        let k = self.num_topics() as f64;
        (self.doc_topic[doc][topic] as f64 + self.config.alpha) / (self.docs[doc].len() as f64 + k * self.config.alpha)
    }

    /// Recounts every table from the token assignments.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let k = self.num_topics();
        let mut tw = vec![vec![0u32; self.vocab.len()]; k];
        let mut tt = vec![0u32; k];
        for (d, (words, topics)) in self.docs.iter().zip(&self.assignments).enumerate() {
            let mut dt = vec![0u32; k];
            for (&w, &z) in words.iter().zip(topics) {
                if z >= k {
                    return Err(format!("token in document {d} has topic {z}"));
                }
                tw[z][w] += 1;
                tt[z] += 1;
                dt[z] += 1;
            }
            if dt != self.doc_topic[d] {
                return Err(format!("document-topic counts of document {d} are stale"));
            }
        }
        if tw != self.topic_word || tt != self.topic_totals {
            return Err("topic-word counts are stale".into());
        }
        let total: u64 = self.topic_totals.iter().map(|&c| c as u64).sum();
        if total != self.token_count() as u64 {
            return Err(format!("{total} counted tokens, corpus has {}", self.token_count()));
        }
        Ok(())
    }

    /// Top `n` words of a topic by smoothed probability, ties alphabetical.
    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        if topic >= self.num_topics() {
            return Err(Error::param(format!(
                "topic {topic} out of range (model has {})",
                self.num_topics()
            )));
        }
        let mut ranked: Vec<(usize, f64)> = (0..self.vocab.len()).map(|w| (w, self.phi(topic, w))).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.vocab[a.0].cmp(&self.vocab[b.0])));
        Ok(ranked
            .into_iter()
            .take(n)
            .map(|(w, p)| (self.vocab[w].clone(), p))
            .collect())
    }

    pub fn summary(&self, n: usize) -> TopicSummary {
        let total = self.token_count().max(1) as f64;
        TopicSummary {
            topics: (0..self.num_topics())
                .map(|k| self.top_words(k, n).expect("topic in range"))
                .collect(),
            mass: self.topic_totals.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    /// Perplexity of the training corpus using the fitted document mixtures.
    pub fn training_perplexity(&self) -> f64 {
        let mut ll = 0.0;
        for (d, words) in self.docs.iter().enumerate() {
            let theta: Vec<f64> = (0..self.num_topics()).map(|k| self.theta(d, k)).collect();
            for &w in words {
                let p: f64 = theta.iter().enumerate().map(|(k, t)| t * self.phi(k, w)).sum();
                ll += p.ln();
            }
        }
        (-ll / self.token_count() as f64).exp()
    }

    /// Held-out perplexity. Each document's topic mixture is estimated by
    /// `sweeps` Gibbs sweeps with the topic-word tables frozen; tokens outside
    /// the training vocabulary are dropped.
    pub fn perplexity<S: AsRef<str> + Sync>(&self, heldout: &[Vec<S>], sweeps: usize, seed: u64) -> Result<f64> {
        let k = self.num_topics();
        let alpha = self.config.alpha;
        let per_doc: Vec<(f64, usize)> = heldout
            .par_iter()
            .enumerate()
            .map(|(d, tokens)| {
                let words: Vec<usize> = tokens.iter().filter_map(|t| self.word_id(t.as_ref())).collect();
                if words.is_empty() {
                    return (0.0, 0);
                }
                let phi: Vec<Vec<f64>> = words
                    .iter()
                    .map(|&w| (0..k).map(|t| self.phi(t, w)).collect())
                    .collect();
                let mut rng = seed::rng(seed::derive_seed(seed, d as u64));
                let mut z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
                let mut counts = vec![0u32; k];
                for &t in &z {
                    counts[t] += 1;
                }
                let mut p = vec![0.0; k];
                for _ in 0..sweeps {
                    for i in 0..words.len() {
                        counts[z[i]] -= 1;
                        for t in 0..k {
                            p[t] = (counts[t] as f64 + alpha) * phi[i][t];
                        }
                        z[i] = sample(&p, &mut rng);
                        counts[z[i]] += 1;
                    }
                }
                let norm = words.len() as f64 + k as f64 * alpha;
                let ll: f64 = phi
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .map(|(t, f)| (counts[t] as f64 + alpha) / norm * f)
                            .sum::<f64>()
                            .ln()
                    })
                    .sum();
                (ll, words.len())
            })
            .collect();
        let n: usize = per_doc.iter().map(|p| p.1).sum();
        if n == 0 {
            return Err(Error::Empty(
                "held-out documents contain no in-vocabulary tokens".into(),
            ));
        }
        let ll: f64 = per_doc.iter().map(|p| p.0).sum();
        Ok((-ll / n as f64).exp())
    }

    /// `topic,rank,word,probability` rows for the top `n` words of each topic.
    pub fn report_csv(&self, n: usize) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["topic", "rank", "word", "probability"])?;
        for k in 0..self.num_topics() {
            for (rank, (word, p)) in self.top_words(k, n)?.into_iter().enumerate() {
                w.write_record([k.to_string(), (rank + 1).to_string(), word, format!("{p:.6}")])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    /// Ranked `(word, probability)` per topic.
    pub topics: Vec<Vec<(String, f64)>>,
    /// Share of corpus tokens assigned to each topic.
    pub mass: Vec<f64>,
}

fn sample(weights: &[f64], rng: &mut seed::Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

pub fn train_lda<S: AsRef<str>>(corpus: &[Vec<S>], config: &LdaConfig) -> Result<TopicModel> {
    train_lda_observed(corpus, config, |_, _| {})
}

/// Like [`train_lda`], calling `observe(sweep, model)` after every sweep.
pub fn train_lda_observed<S: AsRef<str>>(
    corpus: &[Vec<S>],
    config: &LdaConfig,
    mut observe: impl FnMut(usize, &TopicModel),
) -> Result<TopicModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Empty("topic modeling needs at least one document".into()));
    }
    let mut vocab = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut docs = Vec::with_capacity(corpus.len());
    for (d, tokens) in corpus.iter().enumerate() {
        if tokens.is_empty() {
            return Err(Error::Validation {
                record: d.to_string(),
                message: "document has no tokens".into(),
            });
        }
        docs.push(
            tokens
                .iter()
                .map(|t| {
                    let t = t.as_ref();
                    *index.entry(t.to_string()).or_insert_with(|| {
                        vocab.push(t.to_string());
                        vocab.len() - 1
                    })
                })
                .collect::<Vec<usize>>(),
        );
    }

    let k = config.num_topics;
    let v = vocab.len();
    let mut rng = seed::rng(config.seed);
    let mut model = TopicModel {
        config: *config,
        topic_word: vec![vec![0; v]; k],
        topic_totals: vec![0; k],
        doc_topic: vec![vec![0; k]; docs.len()],
        assignments: Vec::with_capacity(docs.len()),
        docs: Vec::new(),
        vocab,
        index,
    };
    for (d, words) in docs.iter().enumerate() {
        let z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
        for (&w, &t) in words.iter().zip(&z) {
            model.topic_word[t][w] += 1;
            model.topic_totals[t] += 1;
            model.doc_topic[d][t] += 1;
        }
        model.assignments.push(z);
    }
    model.docs = docs;

    let vbeta = v as f64 * config.beta;
    let mut p = vec![0.0; k];
    for sweep in 0..config.iterations {
        for d in 0..model.docs.len() {
            for i in 0..model.docs[d].len() {
                let w = model.docs[d][i];
                let old = model.assignments[d][i];
                model.topic_word[old][w] -= 1;
                model.topic_totals[old] -= 1;
                model.doc_topic[d][old] -= 1;
                for t in 0..k {
                    p[t] = (model.doc_topic[d][t] as f64 + config.alpha)
                        * (model.topic_word[t][w] as f64 + config.beta)
                        / (model.topic_totals[t] as f64 + vbeta);
                }
                let new = sample(&p, &mut rng);
                model.topic_word[new][w] += 1;
                model.topic_totals[new] += 1;
                model.doc_topic[d][new] += 1;
                model.assignments[d][i] = new;
            }
        }
        observe(sweep, &model);
    }
    Ok(model)
}

/// Token counts in descending order, ties alphabetical.
pub fn word_frequencies<S: AsRef<str>>(corpus: &[Vec<S>]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        for t in doc {
            *counts.entry(t.as_ref()).or_insert(0) += 1;
        }
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().map(|(w, c)| (w.to_string(), c)).collect();
    // Stable sort keeps the alphabetical order among equal counts.
    out.sort_by(|a, b| b.1.cmp(&a.1));
    out
}

/// `word,count`
pub fn frequencies_csv(freqs: &[(String, usize)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["word", "count"])?;
    for (word, c) in freqs {
        w.write_record([word.as_str(), &c.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
