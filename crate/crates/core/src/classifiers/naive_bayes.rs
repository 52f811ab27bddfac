//! Multinomial naive Bayes, trained either generatively (frequency counts)
//! or discriminatively (counts accumulated with weight `1 - p(true label)`).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{require_both_labels, softmax2, DmnbParams, Prediction};
use crate::corpus::Label;
use crate::error::Result;
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub log_prior: Vec<f64>,
    /// `log_likelihood[label][feature]`
    pub log_likelihood: Vec<Vec<f64>>,
}

impl NaiveBayesModel {
    pub fn log_posterior_unnormalized(&self, x: &SparseVector) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let ll = &self.log_likelihood[c];
            *slot = self.log_prior[c] + x.iter().map(|(f, v)| v * ll[f]).sum::<f64>();
        }
        out
    }

    pub fn predict(&self, x: &SparseVector) -> Prediction {
        Prediction::from_scores(softmax2(self.log_posterior_unnormalized(x)), true)
    }
}

/// Smoothed count tables shared by both trainers.
struct CountTables {
    prior: [f64; 2],
    counts: [Vec<f64>; 2],
    totals: [f64; 2],
}

impl CountTables {
    fn smoothed(dim: usize, alpha: f64, prior_mass: f64) -> Self {
        CountTables {
            prior: [prior_mass; 2],
            counts: [vec![alpha; dim], vec![alpha; dim]],
            totals: [alpha * dim as f64; 2],
        }
    }

    fn add(&mut self, label: usize, x: &SparseVector, amount: f64) {
        self.prior[label] += amount;
        for (f, v) in x.iter() {
            self.counts[label][f] += amount * v;
        }
        self.totals[label] += amount * x.sum();
    }

    fn posterior(&self, x: &SparseVector) -> [f64; 2] {
        let prior_sum = self.prior[0] + self.prior[1];
        let mut logits = [0.0; 2];
        let xsum = x.sum();
        for (c, logit) in logits.iter_mut().enumerate() {
            let words: f64 = x.iter().map(|(f, v)| v * self.counts[c][f].ln()).sum();
            *logit = (self.prior[c] / prior_sum).ln() + words - xsum * self.totals[c].ln();
        }
        softmax2(logits)
    }

    fn into_model(self) -> NaiveBayesModel {
        let prior_sum = self.prior[0] + self.prior[1];
        let log_prior = self.prior.iter().map(|p| (p / prior_sum).ln()).collect();
        let log_likelihood = self
            .counts
            .iter()
            .zip(self.totals)
            .map(|(row, total)| {
                let lt = total.ln();
                row.iter().map(|c| c.ln() - lt).collect()
            })
            .collect();
        NaiveBayesModel {
            log_prior,
            log_likelihood,
        }
    }
}

/// Priors are label frequencies; likelihoods are `(count + alpha) / (total + alpha * dim)`.
pub(super) fn fit_mnb(x: &FeatureMatrix, y: &[Label], w: Option<&[f64]>, alpha: f64) -> Result<NaiveBayesModel> {
    require_both_labels(y)?;
    let mut tables = CountTables::smoothed(x.dim(), alpha, 0.0);
    for (i, (row, label)) in x.rows().iter().zip(y).enumerate() {
        tables.add(label.index(), row, w.map_or(1.0, |w| w[i]));
    }
    Ok(tables.into_model())
}

/// Discriminative frequency estimate: one seeded shuffle of the training
/// order, then for each pass and instance add `(1 - p_hat)` times the
/// instance to its true label's tables, where `p_hat` is the current model's
/// probability of that label.
pub(super) fn fit_dmnb(
    x: &FeatureMatrix,
    y: &[Label],
    w: Option<&[f64]>,
    params: &DmnbParams,
    seed: u64,
) -> Result<NaiveBayesModel> {
    require_both_labels(y)?;
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let mut tables = CountTables::smoothed(x.dim(), params.alpha, 1.0);
    for _ in 0..params.passes {
        for &i in &order {
            let c = y[i].index();
            let p_true = tables.posterior(x.row(i))[c];
            let weight = w.map_or(1.0, |w| w[i]);
            tables.add(c, x.row(i), (1.0 - p_true) * weight);
        }
    }
    Ok(tables.into_model())
}
