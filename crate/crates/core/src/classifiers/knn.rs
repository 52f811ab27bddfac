//! k-nearest-neighbour classifier under cosine distance.

use serde::{Deserialize, Serialize};

use super::Prediction;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub instances: Vec<SparseVector>,
    pub labels: Vec<Label>,
    norms: Vec<f64>,
}

impl KnnModel {
    pub fn new(x: &FeatureMatrix, y: &[Label], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if x.is_empty() {
            return Err(Error::Empty("k-NN needs at least one training instance".into()));
        }
        Ok(KnnModel {
            k,
            instances: x.rows().to_vec(),
            labels: y.to_vec(),
            norms: x.rows().iter().map(|r| r.norm_sq().sqrt()).collect(),
        })
    }

    pub fn predict(&self, x: &SparseVector) -> Prediction {
        let qn = x.norm_sq().sqrt();
        let mut dist: Vec<(f64, usize)> = self
            .instances
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (r, &n))| (cosine_distance(x, qn, r, n), i))
            .collect();
        // Stable on the index, so distance ties keep the lower training index.
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(dist.len());
        let mut votes = [0.0; 2];
        for &(_, i) in &dist[..k] {
            votes[self.labels[i].index()] += 1.0;
        }
        Prediction::from_scores([votes[0] / k as f64, votes[1] / k as f64], true)
    }
}

/// `1 - cos(a, b)`; a zero vector has similarity 0 with everything.
fn cosine_distance(a: &SparseVector, na: f64, b: &SparseVector, nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - a.dot(b) / (na * nb)
}

/// One-off prediction without building a model.
pub fn knn_predict(x: &FeatureMatrix, y: &[Label], k: usize, query: &SparseVector) -> Result<Prediction> {
    Ok(KnnModel::new(x, y, k)?.predict(query))
}
