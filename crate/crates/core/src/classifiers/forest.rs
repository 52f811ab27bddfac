//! Random forest of unpruned random-feature trees.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, Criterion, GrowParams, TreeModel};
use super::{ForestParams, Prediction};
use crate::corpus::Label;
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
}

impl ForestModel {
    /// Mean of the trees' leaf distributions.
    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let mut acc = [0.0; 2];
        for t in &self.trees {
            let d = t.distribution(x);
            acc[0] += d[0];
            acc[1] += d[1];
        }
        let n = self.trees.len() as f64;
        Prediction::from_scores([acc[0] / n, acc[1] / n], true)
    }
}

pub fn default_features_per_split(dim: usize) -> usize {
    if dim <= 1 {
        1
    } else {
        dim.ilog2() as usize + 1
    }
}

pub(super) fn fit(x: &FeatureMatrix, y: &[Label], params: &ForestParams, seed: u64) -> ForestModel {
    let k = params
        .features_per_split
        .unwrap_or_else(|| default_features_per_split(x.dim()));
    let grow = GrowParams {
        criterion: Criterion::RandomInfoGain { features_per_split: k },
        min_leaf: 1.0,
        max_depth: params.max_depth,
        prune_confidence: None,
    };
    let n = y.len();
    let w = vec![1.0; n];
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive_seed(seed, t as u64));
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(x, y, &idx, &w, &grow, Some(rng))
        })
        .collect();
    ForestModel { trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn params(n_trees: usize) -> ForestParams {
        ForestParams {
            n_trees,
            ..ForestParams::default()
        }
    }

    #[test]
    fn default_feature_count() {
        assert_eq!(default_features_per_split(1), 1);
        assert_eq!(default_features_per_split(2), 2);
        assert_eq!(default_features_per_split(1000), 10);
        assert_eq!(default_features_per_split(1024), 11);
    }

    #[test]
    fn deterministic_under_parallelism() {
        let (x, y) = synthetic::linearly_separable(80, 6, 3);
        let a = fit(&x, &y, &params(12), 42);
        let b = fit(&x, &y, &params(12), 42);
        assert_eq!(a, b);
        let c = fit(&x, &y, &params(12), 43);
        assert_ne!(a, c);
    }

    #[test]
    fn fits_training_data_well() {
        let (x, y) = synthetic::linearly_separable(120, 4, 8);
        let m = fit(&x, &y, &params(30), 1);
        let correct = x
            .rows()
            .iter()
            .zip(&y)
            .filter(|(r, l)| m.predict(r).label == **l)
            .count();
        assert!(correct >= 114, "{correct}/120");
    }

    #[test]
    fn scores_are_probabilities() {
        let (x, y) = synthetic::linearly_separable(40, 3, 2);
        let m = fit(&x, &y, &params(5), 0);
        for r in x.rows() {
            let p = m.predict(r);
            assert!((p.scores[0] + p.scores[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_unbootstrapped_tree_is_a_plain_tree() {
        let (x, y) = synthetic::linearly_separable(60, 4, 3);
        let p = ForestParams {
            n_trees: 1,
            max_depth: None,
            features_per_split: Some(x.dim()),
            bootstrap: false,
        };
        let forest = fit(&x, &y, &p, 9);
        let grow = GrowParams {
            criterion: Criterion::RandomInfoGain {
                features_per_split: x.dim(),
            },
            min_leaf: 1.0,
            max_depth: None,
            prune_confidence: None,
        };
        let idx: Vec<usize> = (0..y.len()).collect();
        let tree = grow_tree(
            &x,
            &y,
            &idx,
            &vec![1.0; y.len()],
            &grow,
            Some(seed::rng(seed::derive_seed(9, 0))),
        );
        assert_eq!(forest.trees, vec![tree.clone()]);
        for r in x.rows() {
            assert_eq!(forest.predict(r), tree.predict(r));
        }
    }

    #[test]
    fn separable_set_is_fit_exactly() {
        let (x, y) = synthetic::linearly_separable(100, 3, 6);
        let m = fit(&x, &y, &params(25), 2);
        let correct = x
            .rows()
            .iter()
            .zip(&y)
            .filter(|(r, l)| m.predict(r).label == **l)
            .count();
        assert_eq!(correct, 100);
    }
}
