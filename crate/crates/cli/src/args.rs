use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use misinfo_core::corpus::DatasetSchema;
use misinfo_core::Source;

#[derive(Debug, Parser)]
#[command(
    name = "misinfo",
    version,
    about = "COVID-19 misinformation detection pipeline for Luganda-English posts"
)]
pub struct Cli {
    /// Repeat for more log output on standard error.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label counts per source, plus whole-corpus vocabulary sizes.
    Stats(StatsArgs),
    /// Normalize the published dataset file into the canonical JSON schema.
    Convert(ConvertArgs),
    /// Write a cleaned copy of a dataset.
    Preprocess(PreprocessArgs),
    /// Emit the n-gram vocabulary and sparse feature matrix.
    Featurize(FeaturizeArgs),
    /// Stratified cross-validation of one learner or a whole experiment file.
    Cv(CvArgs),
    /// LDA topics, perplexities and word frequencies.
    Topics(TopicsArgs),
    /// Fit a learner on a full dataset and save it.
    Train(TrainArgs),
    /// Score documents with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemaArg {
    Canonical,
    Released,
}

impl From<SchemaArg> for DatasetSchema {
    fn from(s: SchemaArg) -> Self {
        match s {
            SchemaArg::Canonical => DatasetSchema::Canonical,
            SchemaArg::Released => DatasetSchema::Released,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Twitter,
    Facebook,
    All,
}

impl SourceArg {
    pub fn filter(self) -> Option<Source> {
        match self {
            SourceArg::Twitter => Some(Source::Twitter),
            SourceArg::Facebook => Some(Source::Facebook),
            SourceArg::All => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceArg::Twitter => "twitter",
            SourceArg::Facebook => "facebook",
            SourceArg::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    /// All cleaning rules, stopwords kept.
    Classification,
    /// All cleaning rules plus stopword removal.
    Topics,
    /// Text left untouched.
    None,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Layout of the dataset file.
    #[arg(long, value_enum, default_value = "canonical")]
    pub schema: SchemaArg,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Also write stats.csv, stats.txt and vocabulary_sizes.csv here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub text_field: Option<String>,
    #[arg(long)]
    pub label_field: Option<String>,
    #[arg(long)]
    pub source_field: Option<String>,
    #[arg(long)]
    pub id_field: Option<String>,
    /// Source for records that carry none.
    #[arg(long, value_enum)]
    pub default_source: Option<SourceArg>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "classification")]
    pub preset: PresetArg,
    /// Stopword files for the topics preset.
    #[arg(long)]
    pub stopwords: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Longest n-gram order; shorter orders are included.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub ngrams: u8,
    #[arg(long, default_value_t = 1)]
    pub min_df: usize,
    /// Occurrence counts instead of presence indicators.
    #[arg(long)]
    pub counts: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Experiment file; other flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub schema: Option<SchemaArg>,
    /// Learner name (e.g. `dmnb`) or JSON object with hyperparameters.
    #[arg(long)]
    pub learner: Option<String>,
    /// Row name in the results table when `--learner` is used.
    #[arg(long)]
    pub name: Option<String>,
    /// Comma-separated n-gram orders, each in 1..=3.
    #[arg(long, value_delimiter = ',')]
    pub ngrams: Vec<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Vec<PathBuf>,
    /// One vocabulary from the whole corpus instead of per training fold.
    #[arg(long)]
    pub whole_corpus_vocab: bool,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub stopwords: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub source: SourceArg,
    #[arg(long, default_value_t = 10)]
    pub topics: usize,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    /// Defaults to 50 / topics.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 100)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    /// Share of documents held out for held-out perplexity; 0 skips it.
    #[arg(long, default_value_t = 0.1)]
    pub heldout_fraction: f64,
    /// Entries in the word-frequency list.
    #[arg(long, default_value_t = 30)]
    pub frequency_list: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub learner: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub ngrams: u8,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Canonical-schema documents; labels are optional.
    #[arg(long)]
    pub dataset: PathBuf,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
