use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use misinfo_bench::{corpus, features, tokens};
use misinfo_core::classifiers::{DmnbParams, SmoParams};
use misinfo_core::evaluate::auroc;
use misinfo_core::featurize::build_vocabulary;
use misinfo_core::topics::train_lda;
use misinfo_core::{synthetic, KernelConfig, Label, LdaConfig, ModelSpec, NGramConfig};

fn featurize(c: &mut Criterion) {
    let ds = corpus();
    let toks = tokens(&ds);
    for n in 1..=3 {
        let cfg = NGramConfig::new(n).unwrap();
        c.bench_function(&format!("vocabulary_{n}gram"), |b| {
            b.iter(|| build_vocabulary(black_box(&toks), &cfg).unwrap())
        });
    }
}

fn learners(c: &mut Criterion) {
    let ds = corpus();
    let (x, y) = features(&ds, 1);
    let dmnb = ModelSpec::Dmnb(DmnbParams::default());
    c.bench_function("dmnb_fit_unigram", |b| {
        b.iter(|| dmnb.fit(black_box(&x), &y, 1).unwrap())
    });

    let (xs, ys) = synthetic::linearly_separable(200, 5, 11);
    let smo = ModelSpec::SmoKernel(SmoParams {
        kernel: KernelConfig::linear(),
        c: 100.0,
        ..SmoParams::default()
    });
    c.bench_function("smo_linear_200", |b| {
        b.iter(|| smo.fit(black_box(&xs), &ys, 0).unwrap())
    });
}

fn metrics(c: &mut Criterion) {
    let scores: Vec<f64> = (0..1045).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
    let labels: Vec<Label> = (0..1045)
        .map(|i| {
            if i % 5 < 3 {
                Label::Misinformation
            } else {
                Label::NoMisinformation
            }
        })
        .collect();
    c.bench_function("auroc_1045", |b| b.iter(|| auroc(black_box(&scores), &labels).unwrap()));
}

fn topics(c: &mut Criterion) {
    let ds = corpus();
    let toks = tokens(&ds);
    let cfg = LdaConfig {
        iterations: 10,
        ..LdaConfig::new(10, 100)
    };
    c.bench_function("lda_10_sweeps", |b| {
        b.iter(|| train_lda(black_box(&toks), &cfg).unwrap())
    });
}

criterion_group!(benches, featurize, learners, metrics, topics);
criterion_main!(benches);
