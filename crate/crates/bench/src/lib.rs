//! Fixtures shared by the criterion benches.

use misinfo_core::featurize::{build_vocabulary, tokenize_dataset, vectorize_all};
use misinfo_core::preprocess::{clean_text, CleaningConfig};
use misinfo_core::synthetic;
use misinfo_core::{FeatureMatrix, Label, LabeledDataset, NGramConfig};

/// Cleaned surrogate corpus with the usual source and label counts.
pub fn corpus() -> LabeledDataset {
    let raw = synthetic::surrogate_corpus(synthetic::DEFAULT_COUNTS, 0.15, 7);
    let cfg = CleaningConfig::classification();
    raw.map_text(|t| clean_text(t, &cfg))
}

pub fn tokens(ds: &LabeledDataset) -> Vec<Vec<String>> {
    tokenize_dataset(ds)
}

/// Whole-corpus feature matrix and labels for the given n-gram order.
pub fn features(ds: &LabeledDataset, max_n: usize) -> (FeatureMatrix, Vec<Label>) {
    let tokens = tokenize_dataset(ds);
    let cfg = NGramConfig::new(max_n).expect("valid order");
    let vocab = build_vocabulary(&tokens, &cfg).expect("non-empty corpus");
    (vectorize_all(&tokens, &vocab), ds.labels())
}
