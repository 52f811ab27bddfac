use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::stratified_kfold;
use super::metrics::MetricsReport;
use crate::classifiers::{ModelSpec, Prediction};
use crate::corpus::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::featurize::{build_vocabulary, tokenize_dataset, vectorize_all, FeatureMatrix, NGramConfig};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    pub ngram: NGramConfig,
    /// Build one vocabulary from the whole corpus instead of per training fold.
    pub whole_corpus_vocab: bool,
    pub parallel: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 10,
            seed: 1,
            ngram: NGramConfig::default(),
            whole_corpus_vocab: false,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledPrediction {
    pub doc_id: String,
    pub fold: usize,
    pub truth: Label,
    pub prediction: Prediction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub report: MetricsReport,
    /// Test-fold predictions, fold by fold, dataset order within a fold.
    pub predictions: Vec<PooledPrediction>,
    /// Folds whose model hit an iteration cap.
    pub unconverged_folds: Vec<usize>,
}

struct FoldResult {
    predictions: Vec<PooledPrediction>,
    converged: bool,
}

/// Stratified k-fold cross-validation of `spec` on an already cleaned dataset.
/// Metrics are computed once over the pooled test-fold predictions.
pub fn cross_validate(name: &str, spec: &ModelSpec, ds: &LabeledDataset, opts: &CvOptions) -> Result<CvOutcome> {
    spec.validate()?;
    opts.ngram.validate()?;
    let labels = ds.labels();
    let assignment = stratified_kfold(&labels, opts.k, opts.seed)?;
    let tokens = tokenize_dataset(ds);
    let shared_vocab = if opts.whole_corpus_vocab {
        Some(build_vocabulary(&tokens, &opts.ngram)?)
    } else {
        None
    };

    let run_fold = |fold: usize| -> Result<FoldResult> {
        let train = assignment.train_indices(fold);
        let test = assignment.test_indices(fold);
        let pick = |idx: &[usize]| -> Vec<&Vec<String>> { idx.iter().map(|&i| &tokens[i]).collect() };
        let train_tokens: Vec<Vec<String>> = pick(&train).into_iter().cloned().collect();
        let test_tokens: Vec<Vec<String>> = pick(&test).into_iter().cloned().collect();
        let fold_vocab;
        let vocab = match &shared_vocab {
            Some(v) => v,
            None => {
                fold_vocab = build_vocabulary(&train_tokens, &opts.ngram)?;
                &fold_vocab
            }
        };
        let x_train: FeatureMatrix = vectorize_all(&train_tokens, vocab);
        let x_test = vectorize_all(&test_tokens, vocab);
        let y_train: Vec<Label> = train.iter().map(|&i| labels[i]).collect();
        let model = spec.fit(&x_train, &y_train, seed::derive_seed(opts.seed, fold as u64))?;
        let predictions = test
            .iter()
            .zip(model.predict_all(&x_test)?)
            .map(|(&i, prediction)| PooledPrediction {
                doc_id: ds.documents()[i].id.clone(),
                fold,
                truth: labels[i],
                prediction,
            })
            .collect();
        Ok(FoldResult {
            predictions,
            converged: model.converged(),
        })
    };
    let annotate = |fold: usize| {
        run_fold(fold).map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })
    };

    let results: Vec<FoldResult> = if opts.parallel {
        (0..opts.k).into_par_iter().map(annotate).collect::<Result<_>>()?
    } else {
        (0..opts.k).map(annotate).collect::<Result<_>>()?
    };

    let mut predictions = Vec::with_capacity(ds.len());
    let mut unconverged_folds = Vec::new();
    for (fold, r) in results.into_iter().enumerate() {
        if !r.converged {
            unconverged_folds.push(fold);
        }
        predictions.extend(r.predictions);
    }
    let truth: Vec<Label> = predictions.iter().map(|p| p.truth).collect();
    let preds: Vec<Prediction> = predictions.iter().map(|p| p.prediction).collect();
    let report = MetricsReport::from_predictions(name, spec, opts.ngram, opts.k, opts.seed, &truth, &preds)?;
    Ok(CvOutcome {
        report,
        predictions,
        unconverged_folds,
    })
}
