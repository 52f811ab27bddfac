use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use misinfo_core::corpus::{load_dataset, DatasetSchema};
use misinfo_core::synthetic;

fn misinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_misinfo"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small surrogate corpus written in the canonical schema.
fn small_corpus(dir: &Path) -> PathBuf {
    let ds = synthetic::surrogate_corpus([[12, 40], [60, 28]], 0.3, 1);
    let path = dir.join("corpus.json");
    ds.write_json(&path).unwrap();
    path
}

#[test]
fn missing_dataset_exits_with_2() {
    let o = misinfo(&["stats", "--dataset", "/nonexistent/data.json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("nonexistent"));
}

#[test]
fn empty_dataset_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["", "[]"] {
        let p = dir.path().join("empty.json");
        fs::write(&p, body).unwrap();
        let o = misinfo(&["stats", "--dataset", s(&p)]);
        assert_eq!(o.status.code(), Some(2), "{body:?}: {}", stderr(&o));
    }
}

#[test]
fn stats_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let out = dir.path().join("out");
    let o = misinfo(&["stats", "--dataset", s(&data), "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Annotated data"));
    assert!(text.contains("140"));
    let csv = fs::read_to_string(out.join("stats.csv")).unwrap();
    assert!(csv.contains("twitter,misinformation,12"), "{csv}");
    assert!(fs::read_to_string(out.join("vocabulary_sizes.csv"))
        .unwrap()
        .starts_with("max_n,size\n1,"));
}

fn write_config(dir: &Path, data: &Path, experiments: &str) -> PathBuf {
    let cfg = dir.join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "dataset = {:?}\nfolds = 3\nseed = 4\nout_dir = \"results\"\nngrams = [1]\n{experiments}",
            s(data)
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());

    let cfg = write_config(dir.path(), &data, "");
    let o = misinfo(&["cv", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no experiments"), "{}", stderr(&o));

    let cfg = write_config(
        dir.path(),
        &data,
        "[[experiment]]\nname = \"X\"\nlearner = \"perceptron\"\n",
    );
    let o = misinfo(&["cv", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("perceptron"), "{}", stderr(&o));

    let o = misinfo(&["cv", "--dataset", s(&data), "--learner", "dmnb", "--ngrams", "4"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn experiment_suite_writes_tables_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let cfg = write_config(
        dir.path(),
        &data,
        "[[experiment]]\nname = \"DMNB\"\nlearner = \"dmnb\"\n[[experiment]]\nname = \"MNB\"\nlearner = \"mnb\"\n",
    );
    let mut tables = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = misinfo(&["cv", "--config", s(&cfg), "--out-dir", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let csv = fs::read_to_string(out.join("results_1gram.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3, "{csv}");
        assert!(csv.lines().nth(1).unwrap().starts_with("DMNB,"));
        for file in [
            "predictions/dmnb_1gram.csv",
            "predictions/mnb_1gram.csv",
            "reports/dmnb_1gram.json",
        ] {
            assert!(out.join(file).is_file(), "{file}");
        }
        tables.push((
            csv,
            fs::read(out.join("predictions/dmnb_1gram.csv")).unwrap(),
            fs::read(out.join("reports/mnb_1gram.json")).unwrap(),
        ));
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn prediction_dump_reproduces_reported_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let out = dir.path().join("out");
    let o = misinfo(&[
        "cv",
        "--dataset",
        s(&data),
        "--learner",
        "dmnb",
        "--folds",
        "4",
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dump = fs::read_to_string(out.join("predictions/dmnb_1gram.csv")).unwrap();
    let rows: Vec<Vec<&str>> = dump.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 140);
    let correct = rows.iter().filter(|r| r[2] == r[3]).count();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("reports/dmnb_1gram.json")).unwrap()).unwrap();
    let accuracy = report["report"]["accuracy"].as_f64().unwrap();
    assert!((accuracy - 100.0 * correct as f64 / 140.0).abs() < 1e-9);
}

#[test]
fn failing_run_continues_and_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    // Three twitter misinformation posts are too few for 5 stratified folds.
    let ds = synthetic::surrogate_corpus([[3, 20], [0, 10]], 0.3, 2);
    let data = dir.path().join("tiny.json");
    ds.write_json(&data).unwrap();
    let cfg = write_config(
        dir.path(),
        &data,
        "[[experiment]]\nname = \"DMNB\"\nlearner = \"dmnb\"\n",
    );
    let o = misinfo(&["cv", "--config", s(&cfg), "--folds", "5"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("DMNB"));
}

#[test]
fn topics_per_source_and_degenerate_single_topic() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let out = dir.path().join("topics");
    let o = misinfo(&[
        "topics",
        "--dataset",
        s(&data),
        "--source",
        "twitter",
        "--topics",
        "3",
        "--iterations",
        "30",
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let perp = fs::read_to_string(out.join("perplexity_twitter.csv")).unwrap();
    assert!(perp.starts_with("kind,value\ntraining,"), "{perp}");
    assert!(perp.contains("heldout,"));
    assert!(out.join("frequencies_twitter.csv").is_file());

    let o = misinfo(&[
        "topics",
        "--dataset",
        s(&data),
        "--topics",
        "1",
        "--iterations",
        "5",
        "--top-words",
        "4",
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(out.join("topics_all.csv")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.lines().skip(1).all(|l| l.starts_with("0,")));

    let o = misinfo(&["topics", "--dataset", s(&data), "--topics", "0", "--out-dir", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn preprocess_output_is_loadable_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let once = dir.path().join("clean1.json");
    let twice = dir.path().join("clean2.json");
    assert!(misinfo(&["preprocess", "--dataset", s(&data), "--output", s(&once)])
        .status
        .success());
    assert!(misinfo(&["preprocess", "--dataset", s(&once), "--output", s(&twice)])
        .status
        .success());
    assert_eq!(fs::read(&once).unwrap(), fs::read(&twice).unwrap());
    let ds = load_dataset(&once, DatasetSchema::Canonical).unwrap();
    assert!(ds
        .documents()
        .iter()
        .all(|d| !d.text.contains("http") && !d.text.contains('@')));
}

#[test]
fn featurize_writes_vocabulary_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let out = dir.path().join("f");
    let o = misinfo(&[
        "featurize",
        "--dataset",
        s(&data),
        "--ngrams",
        "2",
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let vocab = fs::read_to_string(out.join("vocabulary_2gram.csv")).unwrap();
    assert!(vocab.starts_with("ngram,index,doc_frequency\n"));
    let matrix = fs::read_to_string(out.join("features_2gram.txt")).unwrap();
    assert_eq!(matrix.lines().count(), 140);
}

#[test]
fn train_then_predict_unlabeled_documents() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_corpus(dir.path());
    let model = dir.path().join("model.json");
    let o = misinfo(&[
        "train",
        "--dataset",
        s(&data),
        "--learner",
        "dmnb",
        "--output",
        s(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let posts = dir.path().join("posts.jsonl");
    fs::write(
        &posts,
        "{\"id\":\"p1\",\"text\":\"Corona virus cure!!\",\"source\":\"twitter\"}\n{\"id\":\"p2\",\"text\":\"stay home\",\"source\":\"facebook\",\"label\":null}\n",
    )
    .unwrap();
    let o = misinfo(&["predict", "--model", s(&model), "--dataset", s(&posts)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "doc_id,predicted_label,positive_score,true_label");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("p1,"));

    let o = misinfo(&["predict", "--model", s(&posts), "--dataset", s(&posts)]);
    assert_eq!(o.status.code(), Some(2));
}
