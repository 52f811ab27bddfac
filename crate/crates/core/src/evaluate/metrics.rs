use serde::{Deserialize, Serialize};

use crate::classifiers::{ModelSpec, Prediction};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::featurize::NGramConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[true][predicted]`, indexed by `Label::index()`.
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn new(counts: [[usize; 2]; 2]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (t, p) in truth.iter().zip(predicted) {
            cm.counts[t.index()][p.index()] += 1;
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }

    /// Percentage of correct predictions.
    pub fn accuracy(&self) -> f64 {
        100.0 * self.correct() as f64 / self.total() as f64
    }

    pub fn support(&self, label: Label) -> usize {
        self.counts[label.index()].iter().sum()
    }

    /// Per-label precision, recall and F1 as percentages; 0 where undefined.
    pub fn label_metrics(&self, label: Label) -> LabelMetrics {
        let c = label.index();
        let tp = self.counts[c][c] as f64;
        let predicted = (self.counts[0][c] + self.counts[1][c]) as f64;
        let actual = self.support(label) as f64;
        let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let recall = if actual > 0.0 { tp / actual } else { 0.0 };
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        LabelMetrics {
            precision: 100.0 * precision,
            recall: 100.0 * recall,
            f_measure: 100.0 * f_measure,
            support: self.support(label),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub support: usize,
}

/// Support-weighted mean of per-label F1, as a percentage.
pub fn weighted_f_measure(cm: &ConfusionMatrix) -> f64 {
    let total = cm.total() as f64;
    Label::ALL
        .iter()
        .map(|&l| {
            let m = cm.label_metrics(l);
            m.f_measure * m.support as f64 / total
        })
        .sum()
}

/// Area under the ROC curve as a percentage, with misinformation as the
/// positive label. Uses the Mann-Whitney statistic with mid-ranks, so tied
/// positive/negative pairs count one half.
pub fn auroc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::param("AUROC scores contain NaN"));
    }
    let n_pos = labels.iter().filter(|l| **l == Label::Misinformation).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::MissingLabel(
            if n_pos == 0 {
                Label::Misinformation
            } else {
                Label::NoMisinformation
            }
            .as_str()
            .to_string(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of doubled mid-ranks of the positives keeps everything integral.
    let mut rank_sum_x2: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share the mid-rank (i + j + 2) / 2.
        let doubled = (i + j + 2) as u64;
        for &t in &order[i..=j] {
            if labels[t] == Label::Misinformation {
                rank_sum_x2 += doubled;
            }
        }
        i = j + 1;
    }
    let np = n_pos as u64;
    let u_x2 = rank_sum_x2 - np * (np + 1);
    let u = u_x2 as f64 / 2.0;
    Ok(100.0 * u / (n_pos as f64 * n_neg as f64))
}

/// Metrics for one cross-validated run, computed on pooled predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub name: String,
    pub spec: ModelSpec,
    pub ngram: NGramConfig,
    pub folds: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub auroc: f64,
    pub f_measure: f64,
    /// Indexed by `Label::index()`.
    pub per_label: [LabelMetrics; 2],
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_predictions(
        name: &str,
        spec: &ModelSpec,
        ngram: NGramConfig,
        folds: usize,
        seed: u64,
        truth: &[Label],
        predictions: &[Prediction],
    ) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Empty("no predictions to evaluate".into()));
        }
        let predicted: Vec<Label> = predictions.iter().map(|p| p.label).collect();
        let scores: Vec<f64> = predictions.iter().map(|p| p.positive_score()).collect();
        let confusion = ConfusionMatrix::from_labels(truth, &predicted);
        Ok(MetricsReport {
            name: name.to_string(),
            spec: spec.clone(),
            ngram,
            folds,
            seed,
            accuracy: confusion.accuracy(),
            auroc: auroc(&scores, truth)?,
            f_measure: weighted_f_measure(&confusion),
            per_label: Label::ALL.map(|l| confusion.label_metrics(l)),
            confusion,
        })
    }
}
