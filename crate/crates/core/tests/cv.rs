use misinfo_core::classifiers::{
    AdaBoostParams, BaggingParams, C45Params, DmnbParams, ForestParams, KnnParams, LogisticParams, MnbParams,
    PegasosLoss, PegasosParams, SmoParams,
};
use misinfo_core::evaluate::{cross_validate, prediction_dump_csv};
use misinfo_core::preprocess::clean_text;
use misinfo_core::{
    seed, synthetic, CleaningConfig, CvOptions, Document, KernelConfig, Label, LabeledDataset, ModelSpec, Source,
};
use rand::seq::SliceRandom;

fn learners() -> Vec<ModelSpec> {
    let dmnb = || Box::new(ModelSpec::Dmnb(DmnbParams::default()));
    vec![
        ModelSpec::Mnb(MnbParams::default()),
        ModelSpec::Dmnb(DmnbParams::default()),
        ModelSpec::LogisticRidge(LogisticParams::default()),
        ModelSpec::Pegasos(PegasosParams {
            loss: PegasosLoss::Hinge,
            epochs: 30,
            ..PegasosParams::default()
        }),
        ModelSpec::Pegasos(PegasosParams {
            loss: PegasosLoss::Log,
            epochs: 30,
            ..PegasosParams::default()
        }),
        ModelSpec::SmoKernel(SmoParams::default()),
        ModelSpec::SmoKernel(SmoParams {
            kernel: KernelConfig::polynomial(1.0, 1.0, 2),
            calibrate: true,
            ..SmoParams::default()
        }),
        ModelSpec::SmoKernel(SmoParams {
            kernel: KernelConfig::sigmoid(0.4, 0.0),
            ..SmoParams::default()
        }),
        ModelSpec::Knn(KnnParams::default()),
        ModelSpec::C45Tree(C45Params {
            min_leaf: 1,
            prune: false,
            ..C45Params::default()
        }),
        ModelSpec::RandomForest(ForestParams {
            n_trees: 25,
            ..ForestParams::default()
        }),
        ModelSpec::Bagging(BaggingParams {
            base: dmnb(),
            n_members: 5,
            bootstrap: true,
        }),
        ModelSpec::AdaboostM1(AdaBoostParams {
            base: dmnb(),
            n_rounds: 5,
        }),
    ]
}

/// Every post carries three tokens naming its own label; each label has
/// only ten such token triples, so every test post has an identical twin
/// in its training folds.
fn leaky_corpus() -> LabeledDataset {
    let mut rng = seed::rng(21);
    let mut documents = Vec::new();
    for i in 0..120 {
        let label = if i % 3 == 0 {
            Label::NoMisinformation
        } else {
            Label::Misinformation
        };
        let prefix = if label == Label::Misinformation { "fake" } else { "true" };
        let mut words: Vec<String> = (0..5).map(|w| format!("{prefix}{w}")).collect();
        words.shuffle(&mut rng);
        words.truncate(3);
        words.sort();
        words.push("covid".into());
        documents.push(Document {
            id: format!("{i:03}"),
            text: words.join(" "),
            source: if i % 2 == 0 { Source::Twitter } else { Source::Facebook },
            label: Some(label),
        });
    }
    LabeledDataset::new(documents).unwrap()
}

#[test]
fn leaky_corpus_is_learned_perfectly_by_every_learner() {
    let ds = leaky_corpus();
    let opts = CvOptions {
        k: 5,
        ..CvOptions::default()
    };
    for spec in learners() {
        let out = cross_validate(spec.kind(), &spec, &ds, &opts).unwrap();
        assert_eq!(out.report.accuracy, 100.0, "{spec:?}");
    }
}

fn cleaned_surrogate() -> LabeledDataset {
    let cfg = CleaningConfig::classification();
    synthetic::surrogate_corpus([[15, 60], [90, 35]], 0.2, 8).map_text(|t| clean_text(t, &cfg))
}

#[test]
fn cross_validation_is_deterministic_and_sequential_matches_parallel() {
    let ds = cleaned_surrogate();
    let spec = ModelSpec::RandomForest(ForestParams {
        n_trees: 10,
        ..ForestParams::default()
    });
    let opts = CvOptions::default();
    let a = cross_validate("rf", &spec, &ds, &opts).unwrap();
    let b = cross_validate("rf", &spec, &ds, &opts).unwrap();
    let c = cross_validate(
        "rf",
        &spec,
        &ds,
        &CvOptions {
            parallel: false,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(a.predictions, c.predictions);
    assert_eq!(
        prediction_dump_csv(&a.predictions).unwrap(),
        prediction_dump_csv(&c.predictions).unwrap()
    );
}

#[test]
fn pooled_dump_reproduces_reported_metrics() {
    let ds = cleaned_surrogate();
    let spec = ModelSpec::Dmnb(DmnbParams::default());
    let out = cross_validate("dmnb", &spec, &ds, &CvOptions::default()).unwrap();
    assert_eq!(out.predictions.len(), ds.len());
    let dump = prediction_dump_csv(&out.predictions).unwrap();
    let correct = dump
        .lines()
        .skip(1)
        .filter(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[2] == f[3]
        })
        .count();
    assert_eq!(out.report.accuracy, 100.0 * correct as f64 / ds.len() as f64);
    assert_eq!(out.report.confusion.total(), ds.len());
    // Each document is tested exactly once.
    let mut ids: Vec<&str> = out.predictions.iter().map(|p| p.doc_id.as_str()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), ds.len());
}

#[test]
fn whole_corpus_vocabulary_changes_only_the_feature_space() {
    let ds = cleaned_surrogate();
    let spec = ModelSpec::Mnb(MnbParams::default());
    let per_fold = cross_validate("mnb", &spec, &ds, &CvOptions::default()).unwrap();
    let whole = cross_validate(
        "mnb",
        &spec,
        &ds,
        &CvOptions {
            whole_corpus_vocab: true,
            ..CvOptions::default()
        },
    )
    .unwrap();
    let folds = |o: &misinfo_core::evaluate::CvOutcome| {
        o.predictions
            .iter()
            .map(|p| (p.doc_id.clone(), p.fold))
            .collect::<Vec<_>>()
    };
    assert_eq!(folds(&per_fold), folds(&whole));
}
