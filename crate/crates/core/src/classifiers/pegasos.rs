//! Pegasos: stochastic sub-gradient descent on the primal SVM objective
//! `lambda/2 |w|^2 + mean loss`, step size `1 / (lambda t)`.
//!
//! The weight vector is stored as `scale * v` so the per-step shrinkage is
//! O(1). The bias is an always-on extra feature and is regularized with
//! the rest of `w`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{PegasosParams, Prediction};
use crate::corpus::Label;
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PegasosLoss {
    Hinge,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PegasosModel {
    pub loss: PegasosLoss,
    /// Feature weights followed by the bias weight.
    pub weights: Vec<f64>,
}

impl PegasosModel {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.weights[self.weights.len() - 1]
    }

    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let f = self.decision(x);
        match self.loss {
            PegasosLoss::Hinge => Prediction::from_decision(f),
            PegasosLoss::Log => Prediction::from_positive_probability(super::logistic::sigmoid(f)),
        }
    }

    /// `lambda/2 |w|^2 + mean loss` on a data set.
    pub fn objective(&self, x: &FeatureMatrix, y: &[Label], lambda: f64) -> f64 {
        let reg = 0.5 * lambda * self.weights.iter().map(|w| w * w).sum::<f64>();
        let loss: f64 = x
            .rows()
            .iter()
            .zip(y)
            .map(|(r, l)| loss_value(self.loss, l.sign() * self.decision(r)))
            .sum();
        reg + loss / y.len() as f64
    }
}

fn loss_value(loss: PegasosLoss, margin: f64) -> f64 {
    match loss {
        PegasosLoss::Hinge => (1.0 - margin).max(0.0),
        PegasosLoss::Log => (1.0 + (-margin).exp()).ln(),
    }
}

/// Scaled weight vector `scale * v`, with `|v|^2` tracked incrementally.
struct ScaledWeights {
    v: Vec<f64>,
    scale: f64,
    norm_sq: f64,
}

impl ScaledWeights {
    fn decision(&self, x: &SparseVector) -> f64 {
        let bias = self.v.len() - 1;
        self.scale * (x.dot_dense(&self.v) + self.v[bias])
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.v.iter_mut().for_each(|w| *w = 0.0);
            self.scale = 1.0;
            self.norm_sq = 0.0;
        } else {
            self.scale *= factor;
            if self.scale < 1e-9 {
                self.v.iter_mut().for_each(|w| *w *= self.scale);
                self.norm_sq *= self.scale * self.scale;
                self.scale = 1.0;
            }
        }
    }

    /// `w += amount * [x, 1]`
    fn add(&mut self, x: &SparseVector, amount: f64) {
        let delta = amount / self.scale;
        let bias = self.v.len() - 1;
        for (f, val) in x.iter().chain(std::iter::once((bias, 1.0))) {
            let d = delta * val;
            self.norm_sq += 2.0 * self.v[f] * d + d * d;
            self.v[f] += d;
        }
    }

    fn norm(&self) -> f64 {
        self.scale * self.norm_sq.max(0.0).sqrt()
    }

    fn materialize(&self) -> Vec<f64> {
        self.v.iter().map(|w| w * self.scale).collect()
    }
}

pub(super) fn fit(x: &FeatureMatrix, y: &[Label], params: &PegasosParams, seed: u64) -> PegasosModel {
    fit_with_history(x, y, params, seed).0
}

/// Trains and returns the weight vector after every epoch.
pub fn fit_with_history(
    x: &FeatureMatrix,
    y: &[Label],
    params: &PegasosParams,
    seed: u64,
) -> (PegasosModel, Vec<PegasosModel>) {
    let lambda = params.lambda;
    let mut rng = seed::rng(seed);
    let mut w = ScaledWeights {
        v: vec![0.0; x.dim() + 1],
        scale: 1.0,
        norm_sq: 0.0,
    };
    let radius = 1.0 / lambda.sqrt();
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut history = Vec::with_capacity(params.epochs);
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let sign = y[i].sign();
            let margin = sign * w.decision(x.row(i));
            w.shrink(1.0 - eta * lambda);
            let step = match params.loss {
                PegasosLoss::Hinge if margin < 1.0 => 1.0,
                PegasosLoss::Hinge => 0.0,
                PegasosLoss::Log => 1.0 / (1.0 + margin.exp()),
            };
            if step > 0.0 {
                w.add(x.row(i), eta * step * sign);
            }
            if params.loss == PegasosLoss::Hinge {
                let norm = w.norm();
                if norm > radius {
                    w.shrink(radius / norm);
                }
            }
        }
        history.push(PegasosModel {
            loss: params.loss,
            weights: w.materialize(),
        });
    }
    let model = history.last().cloned().unwrap_or(PegasosModel {
        loss: params.loss,
        weights: w.materialize(),
    });
    (model, history)
}
