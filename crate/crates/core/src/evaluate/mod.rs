//! Stratified cross-validation and the metrics reported for each run.

mod cv;
mod folds;
mod metrics;
mod report;

pub use cv::{cross_validate, CvOptions, CvOutcome, PooledPrediction};
pub use folds::{stratified_kfold, FoldAssignment};
pub use metrics::{auroc, weighted_f_measure, ConfusionMatrix, LabelMetrics, MetricsReport};
pub use report::{prediction_dump_csv, render_results_table, TableFormat};
