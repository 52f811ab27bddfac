//! Building blocks for detecting COVID-19 misinformation in code-mixed
//! Luganda-English social media posts.
//!
//! The crate covers the whole experimental pipeline:
//!
//! - [`corpus`]: loading, converting and summarizing the labeled dataset
//! - [`preprocess`]: text cleaning and stopword handling
//! - [`featurize`]: tokenization, word n-grams and sparse vectors
//! - [`classifiers`]: naive Bayes variants, linear and kernel SVM solvers,
//!   k-NN, decision trees, random forests, bagging and AdaBoost.M1
//! - [`evaluate`]: stratified cross-validation, AUROC and weighted F-measure
//! - [`topics`]: LDA topic modeling by collapsed Gibbs sampling
//!
//! All randomized components take an explicit seed and are deterministic.

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod featurize;
pub mod preprocess;
pub mod seed;
pub mod synthetic;
pub mod topics;

pub use classifiers::{KernelConfig, KernelKind, ModelSpec, Prediction, TrainedModel};
pub use corpus::{DatasetStats, Document, Label, LabeledDataset, Source};
pub use error::{Error, Result};
pub use evaluate::{ConfusionMatrix, CvOptions, FoldAssignment, MetricsReport};
pub use featurize::{FeatureMatrix, NGramConfig, SparseVector, Vocabulary};
pub use preprocess::{CleaningConfig, StopwordList};
pub use topics::{LdaConfig, TopicModel};
