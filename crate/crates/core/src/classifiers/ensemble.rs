//! Bagging and AdaBoost.M1 over any base learner.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{softmax2, AdaBoostParams, BaggingParams, Prediction, TrainedModel};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    pub members: Vec<TrainedModel>,
}

impl BaggingModel {
    /// Average of member scores. Probabilistic only if every member is.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let mut acc = [0.0; 2];
        let mut probabilistic = true;
        for m in &self.members {
            let p = m.params.predict(x);
            acc[0] += p.scores[0];
            acc[1] += p.scores[1];
            probabilistic &= p.probabilistic;
        }
        let n = self.members.len() as f64;
        Prediction::from_scores([acc[0] / n, acc[1] / n], probabilistic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub members: Vec<TrainedModel>,
    /// `ln((1 - err) / err)` per member.
    pub alphas: Vec<f64>,
    /// Weighted training error of each member when it was fitted.
    pub errors: Vec<f64>,
}

impl AdaBoostModel {
    /// Weighted vote, mapped to probabilities with a softmax.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let mut votes = [0.0; 2];
        for (m, a) in self.members.iter().zip(&self.alphas) {
            votes[m.params.predict(x).label.index()] += a;
        }
        Prediction::from_scores(softmax2(votes), true)
    }
}

pub(super) fn fit_bagging(x: &FeatureMatrix, y: &[Label], params: &BaggingParams, seed: u64) -> Result<BaggingModel> {
    let n = y.len();
    let members = (0..params.n_members)
        .into_par_iter()
        .map(|m| {
            let member_seed = seed::derive_seed(seed, m as u64);
            if params.bootstrap {
                let mut rng = seed::rng(seed::derive_seed(member_seed, 1));
                let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let ys: Vec<Label> = idx.iter().map(|&i| y[i]).collect();
                params.base.fit(&x.select(&idx), &ys, member_seed)
            } else {
                params.base.fit(x, y, member_seed)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggingModel { members })
}

pub(super) fn fit_adaboost(
    x: &FeatureMatrix,
    y: &[Label],
    params: &AdaBoostParams,
    seed: u64,
) -> Result<AdaBoostModel> {
    fit_adaboost_traced(x, y, params, seed, |_| {})
}

/// AdaBoost.M1, calling `observe` with the normalized instance weights after
/// each completed round.
pub fn fit_adaboost_traced(
    x: &FeatureMatrix,
    y: &[Label],
    params: &AdaBoostParams,
    seed: u64,
    mut observe: impl FnMut(&[f64]),
) -> Result<AdaBoostModel> {
    let n = y.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut alphas = Vec::new();
    let mut errors = Vec::new();
    for round in 0..params.n_rounds {
        let model = params
            .base
            .fit_weighted(x, y, Some(&w), seed::derive_seed(seed, round as u64))?;
        let wrong: Vec<bool> = x
            .rows()
            .iter()
            .zip(y)
            .map(|(r, l)| model.params.predict(r).label != *l)
            .collect();
        let err: f64 = w.iter().zip(&wrong).filter(|(_, &bad)| bad).map(|(w, _)| w).sum();
        if err >= 0.5 || err <= 0.0 {
            if members.is_empty() {
                members.push(model);
                alphas.push(1.0);
                errors.push(err);
            }
            break;
        }
        let beta = (1.0 - err) / err;
        members.push(model);
        alphas.push(beta.ln());
        errors.push(err);
        for (wi, &bad) in w.iter_mut().zip(&wrong) {
            if bad {
                *wi *= beta;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        observe(&w);
    }
    if members.is_empty() {
        return Err(Error::param("AdaBoost produced no members"));
    }
    Ok(AdaBoostModel {
        members,
        alphas,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{C45Params, DmnbParams, FittedParams, MnbParams, ModelSpec};
    use crate::synthetic;
    use Label::{Misinformation as M, NoMisinformation as N};

    fn stump() -> ModelSpec {
        ModelSpec::C45Tree(C45Params {
            min_leaf: 1,
            prune: false,
            confidence: 0.25,
            max_depth: Some(1),
        })
    }

    #[test]
    fn bagging_without_resampling_averages_identical_members() {
        let (x, y) = synthetic::linearly_separable(50, 4, 6);
        let base = ModelSpec::Mnb(MnbParams::default());
        let single = base.fit(&x, &y, 0).unwrap();
        let bag = fit_bagging(
            &x,
            &y,
            &BaggingParams {
                base: Box::new(base),
                n_members: 4,
                bootstrap: false,
            },
            0,
        )
        .unwrap();
        for r in x.rows() {
            let a = single.params.predict(r).scores[0];
            let b = bag.predict(r).scores[0];
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bagging_is_deterministic() {
        let (x, y) = synthetic::linearly_separable(50, 4, 6);
        let p = BaggingParams {
            base: Box::new(ModelSpec::Dmnb(DmnbParams::default())),
            n_members: 5,
            bootstrap: true,
        };
        assert_eq!(fit_bagging(&x, &y, &p, 9).unwrap(), fit_bagging(&x, &y, &p, 9).unwrap());
    }

    #[test]
    fn adaboost_stumps_fit_an_interval() {
        // Positive only in the middle: no single stump can fit it, three can.
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let x = FeatureMatrix::from_dense(&rows).unwrap();
        let y: Vec<Label> = (0..12).map(|i| if (4..8).contains(&i) { M } else { N }).collect();
        let p = AdaBoostParams {
            base: Box::new(stump()),
            n_rounds: 20,
        };
        let m = fit_adaboost(&x, &y, &p, 0).unwrap();
        assert!(m.members.len() > 1);
        let correct = x
            .rows()
            .iter()
            .zip(&y)
            .filter(|(r, l)| m.predict(r).label == **l)
            .count();
        assert_eq!(correct, 12);
    }

    #[test]
    fn adaboost_two_rounds_by_hand() {
        // Round 1: every stump predicts M everywhere (the 2.5 split leaves a
        // 1:1 tie on the right), err = 1/4, beta = 3, weights -> (1,1,3,1)/6.
        // Round 2: only the 2.5 split has above-average gain; its right leaf
        // now favours N, so the single error is x = 4 with err = 1/6, beta = 5,
        // weights -> (1,1,3,5)/10.
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        let y = [M, M, N, M];
        let p = AdaBoostParams {
            base: Box::new(stump()),
            n_rounds: 2,
        };
        let mut trace = Vec::new();
        let m = fit_adaboost_traced(&x, &y, &p, 0, |w| trace.push(w.to_vec())).unwrap();
        assert!((m.errors[0] - 0.25).abs() < 1e-12);
        assert!((m.errors[1] - 1.0 / 6.0).abs() < 1e-12);
        assert!((m.alphas[0] - 3f64.ln()).abs() < 1e-12);
        assert!((m.alphas[1] - 5f64.ln()).abs() < 1e-12);
        let expect = [vec![1.0 / 6.0, 1.0 / 6.0, 0.5, 1.0 / 6.0], vec![0.1, 0.1, 0.3, 0.5]];
        for (got, want) in trace.iter().zip(&expect) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-12, "{got:?}");
            }
        }
    }

    #[test]
    fn adaboost_weights_stay_normalized() {
        let (x, y) = synthetic::linearly_separable(60, 4, 13);
        let p = AdaBoostParams {
            base: Box::new(stump()),
            n_rounds: 8,
        };
        fit_adaboost_traced(&x, &y, &p, 1, |w| {
            assert!(w.iter().all(|&v| v > 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        })
        .unwrap();
    }

    #[test]
    fn adaboost_stops_on_perfect_member() {
        let x = FeatureMatrix::from_dense(&[vec![0.0], vec![1.0]]).unwrap();
        let m = fit_adaboost(
            &x,
            &[N, M],
            &AdaBoostParams {
                base: Box::new(stump()),
                n_rounds: 10,
            },
            0,
        )
        .unwrap();
        assert_eq!(m.members.len(), 1);
        assert_eq!(m.alphas, vec![1.0]);
        assert!(matches!(m.members[0].params, FittedParams::C45Tree(_)));
    }

    #[test]
    fn adaboost_probabilities_are_softmax_of_votes() {
        let m = AdaBoostModel {
            members: Vec::new(),
            alphas: Vec::new(),
            errors: Vec::new(),
        };
        let p = m.predict(&SparseVector::zeros(1));
        assert_eq!(p.scores, [0.5, 0.5]);
    }
}
