//! Supervised learners with a uniform train/predict contract.
//!
//! A [`ModelSpec`] is a declarative learner configuration; [`ModelSpec::fit`]
//! turns it into an immutable [`TrainedModel`]. Every learner is binary, with
//! `Label::Misinformation` as the positive class.

mod ensemble;
mod forest;
pub mod kernel;
mod knn;
pub mod logistic;
mod naive_bayes;
pub mod pegasos;
pub mod smo;
pub mod tree;

use std::fs;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

pub use ensemble::{fit_adaboost_traced, AdaBoostModel, BaggingModel};
pub use forest::ForestModel;
pub use kernel::{kernel_eval, KernelConfig, KernelKind};
pub use knn::{knn_predict, KnnModel};
pub use logistic::LogisticModel;
pub use naive_bayes::NaiveBayesModel;
pub use pegasos::{PegasosLoss, PegasosModel};
pub use smo::SmoModel;
pub use tree::TreeModel;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MnbParams {
    pub alpha: f64,
}

impl Default for MnbParams {
    fn default() -> Self {
        MnbParams { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DmnbParams {
    pub passes: usize,
    pub alpha: f64,
}

impl Default for DmnbParams {
    fn default() -> Self {
        DmnbParams { passes: 1, alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            lambda: 1.0,
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PegasosParams {
    pub loss: PegasosLoss,
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for PegasosParams {
    fn default() -> Self {
        PegasosParams {
            loss: PegasosLoss::Hinge,
            lambda: 1e-4,
            epochs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoParams {
    pub kernel: KernelConfig,
    pub c: f64,
    pub tol: f64,
    pub calibrate: bool,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            kernel: KernelConfig::linear(),
            c: 1.0,
            tol: 1e-3,
            calibrate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct C45Params {
    pub min_leaf: usize,
    pub prune: bool,
    pub confidence: f64,
    pub max_depth: Option<usize>,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 2,
            prune: true,
            confidence: 0.25,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    /// `None` means `floor(log2(dim)) + 1`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            features_per_split: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub base: Box<ModelSpec>,
    #[serde(default = "default_members")]
    pub n_members: usize,
    /// Disabling resampling trains every member on the full set.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostParams {
    pub base: Box<ModelSpec>,
    #[serde(default = "default_members")]
    pub n_rounds: usize,
}

fn default_members() -> usize {
    10
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum ModelSpec {
    Mnb(MnbParams),
    Dmnb(DmnbParams),
    LogisticRidge(LogisticParams),
    Pegasos(PegasosParams),
    SmoKernel(SmoParams),
    Knn(KnnParams),
    C45Tree(C45Params),
    RandomForest(ForestParams),
    Bagging(BaggingParams),
    AdaboostM1(AdaBoostParams),
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Mnb(_) => "mnb",
            ModelSpec::Dmnb(_) => "dmnb",
            ModelSpec::LogisticRidge(_) => "logistic_ridge",
            ModelSpec::Pegasos(_) => "pegasos",
            ModelSpec::SmoKernel(_) => "smo_kernel",
            ModelSpec::Knn(_) => "knn",
            ModelSpec::C45Tree(_) => "c45_tree",
            ModelSpec::RandomForest(_) => "random_forest",
            ModelSpec::Bagging(_) => "bagging",
            ModelSpec::AdaboostM1(_) => "adaboost_m1",
        }
    }

    /// Checks documented hyperparameter ranges, recursing into ensemble bases.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive (got {v})")))
            }
        }
        fn at_least_one(name: &str, v: usize) -> Result<()> {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be at least 1")))
            }
        }
        match self {
            ModelSpec::Mnb(p) => positive("alpha", p.alpha),
            // passes = 0 is allowed: it leaves only the smoothing mass.
            ModelSpec::Dmnb(p) => positive("alpha", p.alpha),
            ModelSpec::LogisticRidge(p) => {
                positive("lambda", p.lambda)?;
                positive("tol", p.tol)
            }
            ModelSpec::Pegasos(p) => {
                positive("lambda", p.lambda)?;
                at_least_one("epochs", p.epochs)
            }
            ModelSpec::SmoKernel(p) => {
                positive("C", p.c)?;
                positive("tol", p.tol)?;
                p.kernel.validate()
            }
            ModelSpec::Knn(p) => at_least_one("k", p.k),
            ModelSpec::C45Tree(p) => {
                at_least_one("min_leaf", p.min_leaf)?;
                if !(p.confidence > 0.0 && p.confidence <= 0.5) {
                    return Err(Error::param("confidence must lie in (0, 0.5]"));
                }
                Ok(())
            }
            ModelSpec::RandomForest(p) => {
                at_least_one("n_trees", p.n_trees)?;
                if let Some(f) = p.features_per_split {
                    at_least_one("features_per_split", f)?;
                }
                Ok(())
            }
            ModelSpec::Bagging(p) => {
                at_least_one("n_members", p.n_members)?;
                p.base.validate()
            }
            ModelSpec::AdaboostM1(p) => {
                at_least_one("n_rounds", p.n_rounds)?;
                p.base.validate()
            }
        }
    }

    /// Trains on `(x, y)`. Randomized learners draw only from `seed`.
    pub fn fit(&self, x: &FeatureMatrix, y: &[Label], seed: u64) -> Result<TrainedModel> {
        self.fit_weighted(x, y, None, seed)
    }

    /// Trains with per-instance weights. Learners that cannot use weights
    /// directly are trained on a weighted bootstrap resample instead.
    pub fn fit_weighted(
        &self,
        x: &FeatureMatrix,
        y: &[Label],
        weights: Option<&[f64]>,
        seed: u64,
    ) -> Result<TrainedModel> {
        self.validate()?;
        if x.n_rows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.n_rows(),
                actual: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::Empty("no training instances".into()));
        }
        if let Some(w) = weights {
            if w.len() != y.len() {
                return Err(Error::DimensionMismatch {
                    expected: y.len(),
                    actual: w.len(),
                });
            }
            if w.iter().any(|&v| v < 0.0 || !v.is_finite()) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::param("instance weights must be nonnegative with a positive sum"));
            }
        }
        let weights = weights.map(normalize_to_mean_one);

        let params = if weights.is_some() && !self.accepts_weights() {
            let mut rng = seed::rng(seed::derive_seed(seed, u64::MAX));
            let idx = weighted_resample(weights.as_deref().unwrap(), &mut rng);
            let xs = x.select(&idx);
            let ys: Vec<Label> = idx.iter().map(|&i| y[i]).collect();
            self.fit_params(&xs, &ys, None, seed)?
        } else {
            self.fit_params(x, y, weights.as_deref(), seed)?
        };
        Ok(TrainedModel {
            format_version: MODEL_FORMAT_VERSION,
            spec: self.clone(),
            dim: x.dim(),
            label_names: Label::ALL.map(|l| l.as_str().to_string()),
            params,
        })
    }

    fn accepts_weights(&self) -> bool {
        matches!(
            self,
            ModelSpec::Mnb(_) | ModelSpec::Dmnb(_) | ModelSpec::LogisticRidge(_) | ModelSpec::C45Tree(_)
        )
    }

    fn fit_params(&self, x: &FeatureMatrix, y: &[Label], w: Option<&[f64]>, seed: u64) -> Result<FittedParams> {
        Ok(match self {
            ModelSpec::Mnb(p) => FittedParams::Mnb(naive_bayes::fit_mnb(x, y, w, p.alpha)?),
            ModelSpec::Dmnb(p) => FittedParams::Dmnb(naive_bayes::fit_dmnb(x, y, w, p, seed)?),
            ModelSpec::LogisticRidge(p) => {
                let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
                FittedParams::LogisticRidge(logistic::fit(x, &signs, w, p.lambda, p.max_iter, p.tol))
            }
            ModelSpec::Pegasos(p) => FittedParams::Pegasos(pegasos::fit(x, y, p, seed)),
            ModelSpec::SmoKernel(p) => FittedParams::SmoKernel(smo::fit(x, y, p)?),
            ModelSpec::Knn(p) => FittedParams::Knn(KnnModel::new(x, y, p.k)?),
            ModelSpec::C45Tree(p) => FittedParams::C45Tree(tree::fit_c45(x, y, w, p)),
            ModelSpec::RandomForest(p) => FittedParams::RandomForest(forest::fit(x, y, p, seed)),
            ModelSpec::Bagging(p) => FittedParams::Bagging(ensemble::fit_bagging(x, y, p, seed)?),
            ModelSpec::AdaboostM1(p) => FittedParams::AdaboostM1(ensemble::fit_adaboost(x, y, p, seed)?),
        })
    }
}

/// Rescales weights so they average to one.
fn normalize_to_mean_one(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    let n = w.len() as f64;
    w.iter().map(|v| v * n / total).collect()
}

/// Draws `w.len()` indices with probability proportional to `w`.
fn weighted_resample(w: &[f64], rng: &mut seed::Rng) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(w.len());
    let mut acc = 0.0;
    for v in w {
        acc += v;
        cumulative.push(acc);
    }
    (0..w.len())
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            cumulative.partition_point(|&c| c <= u).min(w.len() - 1)
        })
        .collect()
}

/// Output of a model on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Indexed by `Label::index()`.
    pub scores: [f64; 2],
    /// Whether `scores` are probabilities summing to one.
    pub probabilistic: bool,
}

impl Prediction {
    /// Argmax with ties going to the lower label index.
    pub fn from_scores(scores: [f64; 2], probabilistic: bool) -> Self {
        let label = if scores[1] > scores[0] {
            Label::NoMisinformation
        } else {
            Label::Misinformation
        };
        Prediction {
            label,
            scores,
            probabilistic,
        }
    }

    pub fn from_positive_probability(p: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self::from_scores([p, 1.0 - p], true)
    }

    /// Signed margin, positive favouring misinformation.
    pub fn from_decision(value: f64) -> Self {
        Self::from_scores([value, -value], false)
    }

    /// Ranking score for the positive (misinformation) class.
    pub fn positive_score(&self) -> f64 {
        self.scores[0]
    }
}

/// Softmax over per-label log scores.
pub(crate) fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedParams {
    Mnb(NaiveBayesModel),
    Dmnb(NaiveBayesModel),
    LogisticRidge(LogisticModel),
    Pegasos(PegasosModel),
    SmoKernel(SmoModel),
    Knn(KnnModel),
    C45Tree(TreeModel),
    RandomForest(ForestModel),
    Bagging(BaggingModel),
    AdaboostM1(AdaBoostModel),
}

impl FittedParams {
    fn predict(&self, x: &SparseVector) -> Prediction {
        match self {
            FittedParams::Mnb(m) | FittedParams::Dmnb(m) => m.predict(x),
            FittedParams::LogisticRidge(m) => Prediction::from_positive_probability(m.probability(x)),
            FittedParams::Pegasos(m) => m.predict(x),
            FittedParams::SmoKernel(m) => m.predict(x),
            FittedParams::Knn(m) => m.predict(x),
            FittedParams::C45Tree(m) => m.predict(x),
            FittedParams::RandomForest(m) => m.predict(x),
            FittedParams::Bagging(m) => m.predict(x),
            FittedParams::AdaboostM1(m) => m.predict(x),
        }
    }
}

/// An immutable fitted model, serializable as self-describing JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ModelSpec,
    pub dim: usize,
    pub label_names: [String; 2],
    pub params: FittedParams,
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        self.spec.kind()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &FittedParams {
        &self.params
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(self.params.predict(x))
    }

    pub fn predict_all(&self, x: &FeatureMatrix) -> Result<Vec<Prediction>> {
        x.rows().iter().map(|r| self.predict(r)).collect()
    }

    /// False when an iterative solver stopped at its iteration cap.
    pub fn converged(&self) -> bool {
        match &self.params {
            FittedParams::LogisticRidge(m) => m.converged,
            FittedParams::SmoKernel(m) => m.converged,
            _ => true,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: TrainedModel = serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&body)
    }
}

pub(crate) fn require_both_labels(y: &[Label]) -> Result<()> {
    for label in Label::ALL {
        if !y.contains(&label) {
            return Err(Error::MissingLabel(label.as_str().to_string()));
        }
    }
    Ok(())
}
