use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    /// Fold of each document, in dataset order.
    pub folds: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }

    /// `counts[fold][label]`
    pub fn label_counts(&self, labels: &[Label]) -> Vec<[usize; 2]> {
        let mut counts = vec![[0; 2]; self.k];
        for (&f, l) in self.folds.iter().zip(labels) {
            counts[f][l.index()] += 1;
        }
        counts
    }
}

/// Shuffles each label's documents with its own seeded stream and deals them
/// round-robin over the folds. The dealing position carries over from one
/// label to the next so fold sizes stay balanced too.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::param(format!("k must be at least 2 (got {k})")));
    }
    let mut folds = vec![usize::MAX; labels.len()];
    let mut position = 0;
    for label in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if members.len() < k {
            return Err(Error::param(format!(
                "label {label} has {} instances, fewer than k = {k}",
                members.len()
            )));
        }
        members.shuffle(&mut seed::rng(seed::derive_seed(seed, label.index() as u64)));
        for i in members {
            folds[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldAssignment { folds, k, seed })
}
