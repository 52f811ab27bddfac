use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use log::{info, warn};
use misinfo_core::corpus::{compute_stats, convert_released, load_documents, ConvertOptions};
use misinfo_core::evaluate::{cross_validate, prediction_dump_csv, render_results_table, TableFormat};
use misinfo_core::featurize::{build_vocabulary, sparse_text, tokenize, tokenize_dataset, vectorize_all};
use misinfo_core::preprocess::{clean_text, load_stopwords, remove_stopwords};
use misinfo_core::topics::{frequencies_csv, train_lda, word_frequencies};
use misinfo_core::{
    seed, CleaningConfig, CvOptions, Document, LabeledDataset, LdaConfig, MetricsReport, ModelSpec, NGramConfig,
    Source, StopwordList, TopicModel, TrainedModel, Vocabulary,
};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::config::{parse_learner_flag, slug, Experiment, ExperimentConfig};
use crate::{load_labeled, write_atomic, CliError, CliResult, ExitCode};

pub fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Stats(a) => run_stats(&a),
        Command::Convert(a) => run_convert(&a),
        Command::Preprocess(a) => run_preprocess(&a),
        Command::Featurize(a) => run_featurize(&a),
        Command::Cv(a) => run_cv(&a).map(|_| ()),
        Command::Topics(a) => run_topics(&a).map(|_| ()),
        Command::Train(a) => run_train(&a),
        Command::Predict(a) => run_predict(&a),
    }
}

fn print(text: &str) {
    print!("{text}");
}

fn load_stoplists(paths: &[PathBuf]) -> CliResult<StopwordList> {
    let mut list = StopwordList::default();
    for p in paths {
        list = list.merged(&load_stopwords(p).or_input()?);
    }
    Ok(list)
}

/// Classification cleaning, optionally followed by stopword removal.
pub fn clean_for_classification(ds: &LabeledDataset, stopwords: &StopwordList) -> LabeledDataset {
    let cfg = CleaningConfig::classification();
    ds.map_text(|t| {
        let cleaned = clean_text(t, &cfg);
        if stopwords.is_empty() {
            cleaned
        } else {
            remove_stopwords(&tokenize(&cleaned), stopwords).join(" ")
        }
    })
}

/// Vocabulary sizes for n-gram orders 1..=3 over the whole cleaned corpus.
pub fn vocabulary_sizes(ds: &LabeledDataset) -> misinfo_core::Result<[usize; 3]> {
    let tokens = tokenize_dataset(&clean_for_classification(ds, &StopwordList::default()));
    let mut sizes = [0; 3];
    for (i, size) in sizes.iter_mut().enumerate() {
        *size = build_vocabulary(&tokens, &NGramConfig::new(i + 1)?)?.len();
    }
    Ok(sizes)
}

pub fn run_stats(args: &StatsArgs) -> CliResult {
    let ds = load_labeled(&args.data.dataset, args.data.schema.into())?;
    let stats = compute_stats(&ds).or_input()?;
    let sizes = vocabulary_sizes(&ds).or_run()?;
    let mut sizes_txt = String::from("\nWhole-corpus vocabulary (cumulative n-grams)\n");
    let mut sizes_csv = String::from("max_n,size\n");
    for (i, s) in sizes.iter().enumerate() {
        sizes_txt.push_str(&format!("{:<26}{:>10}\n", format!("up to {}-grams", i + 1), s));
        sizes_csv.push_str(&format!("{},{}\n", i + 1, s));
    }
    let text = stats.render_text();
    print(&text);
    print(&sizes_txt);
    if let Some(dir) = &args.out_dir {
        write_atomic(&dir.join("stats.txt"), &text)?;
        write_atomic(&dir.join("stats.csv"), &stats.render_csv().or_run()?)?;
        write_atomic(&dir.join("vocabulary_sizes.csv"), &sizes_csv)?;
    }
    Ok(())
}

pub fn run_convert(args: &ConvertArgs) -> CliResult {
    let opts = ConvertOptions {
        text_field: args.text_field.clone(),
        label_field: args.label_field.clone(),
        source_field: args.source_field.clone(),
        id_field: args.id_field.clone(),
        default_source: args.default_source.and_then(SourceArg::filter),
    };
    let ds = convert_released(&args.input, &opts).or_input()?;
    write_atomic(&args.output, &ds.to_json().or_run()?)?;
    info!("converted {} documents to {}", ds.len(), args.output.display());
    Ok(())
}

pub fn run_preprocess(args: &PreprocessArgs) -> CliResult {
    let ds = load_labeled(&args.data.dataset, args.data.schema.into())?;
    let stopwords = load_stoplists(&args.stopwords)?;
    let cleaned = match args.preset {
        PresetArg::Classification => clean_for_classification(&ds, &StopwordList::default()),
        PresetArg::Topics => {
            let cfg = CleaningConfig::topic_modeling();
            ds.map_text(|t| remove_stopwords(&tokenize(&clean_text(t, &cfg)), &stopwords).join(" "))
        }
        PresetArg::None => ds.clone(),
    };
    // Blank texts are not valid records, so such documents are dropped.
    let kept: Vec<Document> = cleaned
        .documents()
        .iter()
        .filter(|d| !d.text.trim().is_empty())
        .cloned()
        .collect();
    let dropped = cleaned.len() - kept.len();
    if dropped > 0 {
        warn!("dropped {dropped} documents left empty by cleaning");
    }
    let out = LabeledDataset::new(kept).or_run()?;
    write_atomic(&args.output, &out.to_json().or_run()?)?;
    info!("wrote {} cleaned documents to {}", out.len(), args.output.display());
    Ok(())
}

pub fn run_featurize(args: &FeaturizeArgs) -> CliResult {
    let ds = load_labeled(&args.data.dataset, args.data.schema.into())?;
    let cfg = NGramConfig {
        max_n: args.ngrams as usize,
        min_doc_frequency: args.min_df,
        binary_features: !args.counts,
    };
    cfg.validate().or_input()?;
    let tokens = tokenize_dataset(&clean_for_classification(&ds, &StopwordList::default()));
    let vocab = build_vocabulary(&tokens, &cfg).or_run()?;
    let matrix = vectorize_all(&tokens, &vocab);
    let n = cfg.max_n;
    write_atomic(
        &args.out_dir.join(format!("vocabulary_{n}gram.csv")),
        &vocab.to_csv().or_run()?,
    )?;
    write_atomic(
        &args.out_dir.join(format!("features_{n}gram.txt")),
        &sparse_text(&matrix, &ds.labels()),
    )?;
    print(&format!("documents {}\nvocabulary {}\n", matrix.n_rows(), vocab.len()));
    Ok(())
}

/// One finished cross-validation run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub max_n: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentSummary {
    pub runs: Vec<RunResult>,
    /// `(name, max_n, error)` for runs that failed.
    pub failures: Vec<(String, usize, String)>,
}

impl ExperimentSummary {
    pub fn get(&self, name: &str, max_n: usize) -> Option<&MetricsReport> {
        self.runs
            .iter()
            .find(|r| r.name == name && r.max_n == max_n)
            .map(|r| &r.report)
    }
}

pub fn run_cv(args: &CvArgs) -> CliResult<ExperimentSummary> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path).or_input()?,
        None => {
            let dataset = args
                .dataset
                .clone()
                .ok_or_else(|| CliError::input(anyhow!("either --config or --dataset is required")))?;
            if args.learner.is_none() {
                return Err(CliError::input(anyhow!("--learner is required without --config")));
            }
            ExperimentConfig {
                dataset,
                schema: Default::default(),
                stopwords: Vec::new(),
                ngrams: vec![1],
                min_doc_frequency: 1,
                binary_features: true,
                whole_corpus_vocab: false,
                folds: 10,
                seed: 1,
                out_dir: PathBuf::from("results"),
                experiments: Vec::new(),
            }
        }
    };
    if let Some(flag) = &args.learner {
        let spec = parse_learner_flag(flag).or_input()?;
        let name = args.name.clone().unwrap_or_else(|| spec.kind().to_string());
        cfg.experiments = vec![Experiment {
            name,
            spec,
            ngrams: None,
        }];
    }
    if let Some(d) = &args.dataset {
        cfg.dataset = d.clone();
    }
    if let Some(s) = args.schema {
        cfg.schema = s.into();
    }
    if !args.ngrams.is_empty() {
        cfg.ngrams = args.ngrams.clone();
        for e in &mut cfg.experiments {
            e.ngrams = None;
        }
    }
    if let Some(k) = args.folds {
        cfg.folds = k;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out_dir {
        cfg.out_dir = o.clone();
    }
    if !args.stopwords.is_empty() {
        cfg.stopwords = args.stopwords.clone();
    }
    cfg.whole_corpus_vocab |= args.whole_corpus_vocab;
    run_experiments(&cfg)
}

#[derive(Serialize)]
struct RunRecord<'a> {
    report: &'a MetricsReport,
    vocabulary: &'static str,
    unconverged_folds: &'a [usize],
}

/// Cross-validates every (experiment, n-gram order) pair, writes per-run
/// prediction dumps and reports, then one results table per order.
/// Failed runs are logged and skipped; the error comes back at the end.
pub fn run_experiments(cfg: &ExperimentConfig) -> CliResult<ExperimentSummary> {
    cfg.validate().or_input()?;
    let ds = load_labeled(&cfg.dataset, cfg.schema)?;
    let stopwords = load_stoplists(&cfg.stopwords)?;
    let cleaned = clean_for_classification(&ds, &stopwords);

    let orders = cfg.all_ngrams();
    let jobs: Vec<(&Experiment, usize)> = orders
        .iter()
        .flat_map(|&n| {
            cfg.experiments
                .iter()
                .filter(move |e| cfg.orders_for(e).contains(&n))
                .map(move |e| (e, n))
        })
        .collect();

    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|&(e, n)| {
            let opts = CvOptions {
                k: cfg.folds,
                seed: cfg.seed,
                ngram: cfg.ngram_config(n)?,
                whole_corpus_vocab: cfg.whole_corpus_vocab,
                parallel: true,
            };
            info!("running {} ({n}-gram)", e.name);
            let outcome = cross_validate(&e.name, &e.spec, &cleaned, &opts)?;
            let stem = format!("{}_{n}gram", slug(&e.name));
            write_atomic(
                &cfg.out_dir.join("predictions").join(format!("{stem}.csv")),
                &prediction_dump_csv(&outcome.predictions)?,
            )
            .map_err(|e| e.error)?;
            let record = RunRecord {
                report: &outcome.report,
                vocabulary: if cfg.whole_corpus_vocab {
                    "whole_corpus"
                } else {
                    "per_fold"
                },
                unconverged_folds: &outcome.unconverged_folds,
            };
            write_atomic(
                &cfg.out_dir.join("reports").join(format!("{stem}.json")),
                &(serde_json::to_string_pretty(&record)? + "\n"),
            )
            .map_err(|e| e.error)?;
            if !outcome.unconverged_folds.is_empty() {
                warn!(
                    "{} ({n}-gram): iteration cap reached in folds {:?}",
                    e.name, outcome.unconverged_folds
                );
            }
            Ok::<_, anyhow::Error>(outcome.report)
        })
        .collect();

    let mut summary = ExperimentSummary::default();
    for ((e, n), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(report) => {
                info!(
                    "{} ({n}-gram): accuracy {:.2}, AUROC {:.2}, F {:.2}",
                    e.name, report.accuracy, report.auroc, report.f_measure
                );
                summary.runs.push(RunResult {
                    name: e.name.clone(),
                    max_n: *n,
                    report,
                });
            }
            Err(err) => {
                log::error!("{} ({n}-gram) failed: {err:#}", e.name);
                summary.failures.push((e.name.clone(), *n, format!("{err:#}")));
            }
        }
    }

    for &n in &orders {
        let reports: Vec<MetricsReport> = summary
            .runs
            .iter()
            .filter(|r| r.max_n == n)
            .map(|r| r.report.clone())
            .collect();
        if reports.is_empty() {
            continue;
        }
        let text = render_results_table(&reports, TableFormat::Text).or_run()?;
        write_atomic(&cfg.out_dir.join(format!("results_{n}gram.txt")), &text)?;
        write_atomic(
            &cfg.out_dir.join(format!("results_{n}gram.csv")),
            &render_results_table(&reports, TableFormat::Csv).or_run()?,
        )?;
        print(&format!("{n}-gram results\n{text}\n"));
    }

    if summary.failures.is_empty() {
        Ok(summary)
    } else {
        Err(CliError::run(anyhow!(
            "{} of {} runs failed: {}",
            summary.failures.len(),
            jobs.len(),
            summary
                .failures
                .iter()
                .map(|(name, n, _)| format!("{name} ({n}-gram)"))
                .collect::<Vec<_>>()
                .join(", ")
        )))
    }
}

/// Topic-modeling tokens for one source: full cleaning, stopword removal,
/// documents left empty are dropped.
pub fn topic_corpus(ds: &LabeledDataset, source: Option<Source>, stopwords: &StopwordList) -> Vec<Vec<String>> {
    let cfg = CleaningConfig::topic_modeling();
    ds.filter_source(source)
        .documents()
        .iter()
        .map(|d| remove_stopwords(&tokenize(&clean_text(&d.text, &cfg)), stopwords))
        .filter(|t| !t.is_empty())
        .collect()
}

#[derive(Debug, Clone)]
pub struct TopicsOutcome {
    pub model: TopicModel,
    pub documents: usize,
    pub training_perplexity: f64,
    pub heldout_perplexity: Option<f64>,
    pub frequencies: Vec<(String, usize)>,
}

const HELDOUT_SWEEPS: usize = 50;

pub fn run_topics(args: &TopicsArgs) -> CliResult<TopicsOutcome> {
    let ds = load_labeled(&args.data.dataset, args.data.schema.into())?;
    let stopwords = load_stoplists(&args.stopwords)?;
    let docs = topic_corpus(&ds, args.source.filter(), &stopwords);
    let src = args.source.as_str();
    if docs.is_empty() {
        return Err(CliError::input(anyhow!(
            "no {src} documents with tokens left after cleaning"
        )));
    }
    if !(0.0..1.0).contains(&args.heldout_fraction) {
        return Err(CliError::input(anyhow!("--heldout-fraction must be in [0, 1)")));
    }
    let mut config = LdaConfig::new(args.topics, args.seed);
    config.iterations = args.iterations;
    config.beta = args.beta;
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    config.validate().or_input()?;

    info!(
        "training {} topics on {} {src} documents",
        config.num_topics,
        docs.len()
    );
    let model = train_lda(&docs, &config).or_run()?;
    let training_perplexity = model.training_perplexity();
    let heldout_perplexity = heldout_perplexity(&docs, &config, args.heldout_fraction)?;

    let frequencies: Vec<(String, usize)> = word_frequencies(&docs).into_iter().take(args.frequency_list).collect();
    let out = &args.out_dir;
    write_atomic(
        &out.join(format!("topics_{src}.csv")),
        &model.report_csv(args.top_words).or_run()?,
    )?;
    let text = render_topics(&model, args.top_words).or_run()?;
    write_atomic(&out.join(format!("topics_{src}.txt")), &text)?;
    let mut perp = format!("kind,value\ntraining,{training_perplexity:.6}\n");
    if let Some(h) = heldout_perplexity {
        perp.push_str(&format!("heldout,{h:.6}\n"));
    }
    write_atomic(&out.join(format!("perplexity_{src}.csv")), &perp)?;
    write_atomic(
        &out.join(format!("frequencies_{src}.csv")),
        &frequencies_csv(&frequencies).or_run()?,
    )?;

    print(&text);
    print(&format!("training perplexity {training_perplexity:.2}\n"));
    if let Some(h) = heldout_perplexity {
        print(&format!("held-out perplexity {h:.2}\n"));
    }
    Ok(TopicsOutcome {
        model,
        documents: docs.len(),
        training_perplexity,
        heldout_perplexity,
        frequencies,
    })
}

/// Refits on a seeded split and scores the held-out share with frozen topics.
fn heldout_perplexity(docs: &[Vec<String>], config: &LdaConfig, fraction: f64) -> CliResult<Option<f64>> {
    let n = docs.len();
    let h = ((n as f64 * fraction).round() as usize).min(n.saturating_sub(1));
    if fraction == 0.0 || h == 0 {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed::derive_seed(config.seed, 1)));
    let (test_idx, train_idx) = order.split_at(h);
    let train: Vec<Vec<String>> = train_idx.iter().map(|&i| docs[i].clone()).collect();
    let test: Vec<Vec<String>> = test_idx.iter().map(|&i| docs[i].clone()).collect();
    let model = train_lda(&train, config).or_run()?;
    match model.perplexity(&test, HELDOUT_SWEEPS, seed::derive_seed(config.seed, 2)) {
        Ok(p) => Ok(Some(p)),
        Err(e) => {
            warn!("held-out perplexity skipped: {e}");
            Ok(None)
        }
    }
}

fn render_topics(model: &TopicModel, n: usize) -> misinfo_core::Result<String> {
    let summary = model.summary(n);
    let mut out = String::new();
    for (k, words) in summary.topics.iter().enumerate() {
        let list: Vec<&str> = words.iter().map(|(w, _)| w.as_str()).collect();
        out.push_str(&format!(
            "topic {k} ({:.1}%): {}\n",
            100.0 * summary.mass[k],
            list.join(" ")
        ));
    }
    Ok(out)
}

/// Everything `predict` needs to reproduce training-time featurization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub cleaning: CleaningConfig,
    pub vocabulary: Vocabulary,
    pub model: TrainedModel,
}

pub fn run_train(args: &TrainArgs) -> CliResult {
    let spec: ModelSpec = parse_learner_flag(&args.learner).or_input()?;
    let ds = load_labeled(&args.data.dataset, args.data.schema.into())?;
    let cleaning = CleaningConfig::classification();
    let tokens = tokenize_dataset(&ds.map_text(|t| clean_text(t, &cleaning)));
    let cfg = NGramConfig::new(args.ngrams as usize).or_input()?;
    let vocabulary = build_vocabulary(&tokens, &cfg).or_run()?;
    let x = vectorize_all(&tokens, &vocabulary);
    let model = spec.fit(&x, &ds.labels(), args.seed).or_run()?;
    if !model.converged() {
        warn!("solver stopped at its iteration cap");
    }
    let bundle = ModelBundle {
        cleaning,
        vocabulary,
        model,
    };
    write_atomic(&args.output, &serde_json::to_string(&bundle).or_run()?)?;
    info!("saved {} model to {}", spec.kind(), args.output.display());
    Ok(())
}

pub fn load_bundle(path: &Path) -> CliResult<ModelBundle> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .or_input()?;
    let bundle: ModelBundle = serde_json::from_str(&body)
        .with_context(|| format!("parsing model {}", path.display()))
        .or_input()?;
    // Round-trips the model through its own loader for the version check.
    TrainedModel::from_json(&bundle.model.to_json().or_run()?).or_input()?;
    Ok(bundle)
}

pub fn run_predict(args: &PredictArgs) -> CliResult {
    let bundle = load_bundle(&args.model)?;
    let docs = load_documents(&args.dataset).or_input()?;
    if docs.is_empty() {
        return Err(CliError::input(anyhow!(
            "{} holds no documents",
            args.dataset.display()
        )));
    }
    let tokens: Vec<Vec<String>> = docs
        .iter()
        .map(|d| tokenize(&clean_text(&d.text, &bundle.cleaning)))
        .collect();
    let x = vectorize_all(&tokens, &bundle.vocabulary);
    let preds = bundle.model.predict_all(&x).or_run()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let result: csv::Result<()> = (|| {
        w.write_record(["doc_id", "predicted_label", "positive_score", "true_label"])?;
        for (d, p) in docs.iter().zip(&preds) {
            w.write_record([
                d.id.as_str(),
                p.label.as_str(),
                &format!("{:.6}", p.positive_score()),
                d.label.map_or("", |l| l.as_str()),
            ])?;
        }
        Ok(())
    })();
    result.or_run()?;
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}")).or_run()?).or_run()?;
    match &args.output {
        Some(p) => write_atomic(p, &body)?,
        None => print(&body),
    }
    Ok(())
}
