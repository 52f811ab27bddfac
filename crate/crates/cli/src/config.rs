//! Declarative experiment files in TOML.
//!
//! ```toml
//! dataset = "../data/luganda_misinfo.json"
//! schema = "canonical"          # or "released"
//! folds = 10
//! seed = 1
//! out_dir = "../results"
//! ngrams = [1, 2]
//!
//! [[experiment]]
//! name = "DMNB"
//! learner = "dmnb"
//!
//! [[experiment]]
//! name = "Bagging (DMNB)"
//! learner = "bagging"
//! base = { learner = "dmnb" }
//! ```
//!
//! Relative paths resolve against the directory holding the config file.
//! Every key other than `name` and `ngrams` in an experiment table is a
//! learner hyperparameter.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _};
use misinfo_core::corpus::DatasetSchema;
use misinfo_core::{ModelSpec, NGramConfig};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub spec: ModelSpec,
    /// Overrides the file-level n-gram orders for this entry.
    pub ngrams: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub schema: DatasetSchema,
    /// Stopword files; when any are given their words are dropped before
    /// featurization.
    pub stopwords: Vec<PathBuf>,
    pub ngrams: Vec<usize>,
    pub min_doc_frequency: usize,
    pub binary_features: bool,
    pub whole_corpus_vocab: bool,
    pub folds: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub experiments: Vec<Experiment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: PathBuf,
    #[serde(default)]
    schema: Option<String>,
    #[serde(default)]
    stopwords: Vec<PathBuf>,
    #[serde(default = "default_ngrams")]
    ngrams: Vec<usize>,
    #[serde(default = "one")]
    min_doc_frequency: usize,
    #[serde(default = "yes")]
    binary_features: bool,
    #[serde(default)]
    whole_corpus_vocab: bool,
    #[serde(default = "ten")]
    folds: usize,
    #[serde(default = "one_u64")]
    seed: u64,
    #[serde(default = "default_out")]
    out_dir: PathBuf,
    #[serde(default)]
    experiment: Vec<toml::Table>,
}

fn default_ngrams() -> Vec<usize> {
    vec![1]
}
fn one() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn ten() -> usize {
    10
}
fn yes() -> bool {
    true
}
fn default_out() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let body = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&body, base).with_context(|| format!("in {}", path.display()))
    }

    /// Parses a config body; relative paths are joined onto `base`.
    pub fn parse(body: &str, base: &Path) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(body)?;
        let schema = match raw.schema.as_deref() {
            None => DatasetSchema::Canonical,
            Some(s) => DatasetSchema::parse(s).ok_or_else(|| anyhow!("unknown schema {s:?}"))?,
        };
        let experiments = raw
            .experiment
            .into_iter()
            .enumerate()
            .map(|(i, t)| parse_experiment(t).with_context(|| format!("experiment #{}", i + 1)))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        Ok(ExperimentConfig {
            dataset: resolve(raw.dataset),
            schema,
            stopwords: raw.stopwords.into_iter().map(resolve).collect(),
            ngrams: raw.ngrams,
            min_doc_frequency: raw.min_doc_frequency,
            binary_features: raw.binary_features,
            whole_corpus_vocab: raw.whole_corpus_vocab,
            folds: raw.folds,
            seed: raw.seed,
            out_dir: resolve(raw.out_dir),
            experiments,
        })
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.experiments.is_empty() {
            bail!("config lists no experiments");
        }
        let mut names = HashSet::new();
        for e in &self.experiments {
            if !names.insert(slug(&e.name)) {
                bail!("duplicate experiment name {:?}", e.name);
            }
            e.spec.validate().with_context(|| format!("experiment {:?}", e.name))?;
            if e.ngrams.as_ref().is_some_and(Vec::is_empty) {
                bail!("experiment {:?} lists no n-gram orders", e.name);
            }
        }
        if self.ngrams.is_empty() {
            bail!("config lists no n-gram orders");
        }
        for n in self.all_ngrams() {
            self.ngram_config(n)?;
        }
        if self.folds < 2 {
            bail!("folds must be at least 2 (got {})", self.folds);
        }
        if !self.dataset.is_file() {
            bail!("dataset {} does not exist", self.dataset.display());
        }
        for p in &self.stopwords {
            if !p.is_file() {
                bail!("stopword file {} does not exist", p.display());
            }
        }
        Ok(())
    }

    pub fn ngram_config(&self, max_n: usize) -> anyhow::Result<NGramConfig> {
        let cfg = NGramConfig {
            max_n,
            min_doc_frequency: self.min_doc_frequency,
            binary_features: self.binary_features,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn orders_for<'a>(&'a self, e: &'a Experiment) -> &'a [usize] {
        e.ngrams.as_deref().unwrap_or(&self.ngrams)
    }

    /// Every n-gram order used by some experiment, ascending.
    pub fn all_ngrams(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .experiments
            .iter()
            .flat_map(|e| self.orders_for(e).iter().copied())
            .chain(self.ngrams.iter().copied())
            .collect();
        set.into_iter().collect()
    }
}

fn parse_experiment(mut table: toml::Table) -> anyhow::Result<Experiment> {
    let name = match table.remove("name") {
        Some(toml::Value::String(s)) if !s.trim().is_empty() => s,
        Some(_) => bail!("`name` must be a non-empty string"),
        None => bail!("missing `name`"),
    };
    let ngrams = match table.remove("ngrams") {
        None => None,
        Some(v) => Some(
            v.try_into::<Vec<usize>>()
                .context("`ngrams` must be a list of integers")?,
        ),
    };
    let spec = parse_spec(table).with_context(|| format!("experiment {name:?}"))?;
    Ok(Experiment { name, spec, ngrams })
}

/// File-name stem for an experiment: lowercase ASCII alphanumerics joined
/// by single underscores.
pub fn slug(name: &str) -> String {
    name.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|p| !p.is_empty())
        .map(str::to_ascii_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

/// Builds a learner from a table holding `learner` plus hyperparameters.
/// Unknown learners and unknown keys are rejected by name.
pub fn parse_spec(table: toml::Table) -> anyhow::Result<ModelSpec> {
    check_learner(&table)?;
    let value = toml::Value::Table(table);
    let spec: ModelSpec = value.clone().try_into()?;
    let normalized = toml::Value::try_from(&spec)?;
    unknown_keys(&value, &normalized, "")?;
    Ok(spec)
}

const LEARNERS: &[&str] = &[
    "mnb",
    "dmnb",
    "logistic_ridge",
    "pegasos",
    "smo_kernel",
    "knn",
    "c45_tree",
    "random_forest",
    "bagging",
    "adaboost_m1",
];

fn check_learner(table: &toml::Table) -> anyhow::Result<()> {
    match table.get("learner") {
        None => bail!("missing `learner` (one of {})", LEARNERS.join(", ")),
        Some(toml::Value::String(s)) if LEARNERS.contains(&s.as_str()) => {}
        Some(toml::Value::String(s)) => bail!("unknown learner {s:?} (expected one of {})", LEARNERS.join(", ")),
        Some(_) => bail!("`learner` must be a string"),
    }
    if let Some(toml::Value::Table(base)) = table.get("base") {
        check_learner(base).context("in `base`")?;
    }
    Ok(())
}

/// Every key the user wrote must survive a parse/serialize round trip.
fn unknown_keys(given: &toml::Value, known: &toml::Value, at: &str) -> anyhow::Result<()> {
    if let (toml::Value::Table(g), toml::Value::Table(k)) = (given, known) {
        for (key, v) in g {
            let path = if at.is_empty() {
                key.clone()
            } else {
                format!("{at}.{key}")
            };
            match k.get(key) {
                Some(kv) => unknown_keys(v, kv, &path)?,
                None => bail!("unknown key `{path}`"),
            }
        }
    }
    Ok(())
}

/// Parses a `--learner` flag: a bare learner name or an inline JSON object.
pub fn parse_learner_flag(flag: &str) -> anyhow::Result<ModelSpec> {
    let trimmed = flag.trim();
    let table: toml::Table = if trimmed.starts_with('{') {
        let json: serde_json::Value = serde_json::from_str(trimmed).context("learner JSON")?;
        toml::Value::try_from(json)?
            .try_into()
            .context("learner JSON must be an object")?
    } else {
        let mut t = toml::Table::new();
        t.insert("learner".into(), toml::Value::String(trimmed.to_string()));
        t
    };
    let spec = parse_spec(table)?;
    spec.validate()?;
    Ok(spec)
}
