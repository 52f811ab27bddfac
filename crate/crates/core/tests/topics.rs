use misinfo_core::topics::{train_lda, train_lda_observed};
use misinfo_core::{seed, LdaConfig};
use rand::Rng;

/// Two documents over disjoint ten-word vocabularies.
fn disjoint_pair(seed_value: u64) -> Vec<Vec<String>> {
    let mut rng = seed::rng(seed_value);
    ["left", "right"]
        .iter()
        .map(|prefix| (0..60).map(|_| format!("{prefix}{}", rng.gen_range(0..10))).collect())
        .collect()
}

#[test]
fn two_topics_separate_disjoint_documents() {
    let mut separated = 0;
    for s in 0..10 {
        let docs = disjoint_pair(seed::derive_seed(s, 1));
        let cfg = LdaConfig {
            num_topics: 2,
            alpha: 0.1,
            beta: 0.01,
            iterations: 200,
            seed: s,
        };
        let model = train_lda(&docs, &cfg).unwrap();
        let side = |t: usize| -> Option<&'static str> {
            let words = model.top_words(t, 5).unwrap();
            ["left", "right"]
                .into_iter()
                .find(|p| words.iter().all(|(w, _)| w.starts_with(p)))
        };
        if let (Some(a), Some(b)) = (side(0), side(1)) {
            if a != b {
                separated += 1;
            }
        }
    }
    assert!(separated >= 8, "{separated}/10 seeds separated");
}

fn corpus() -> Vec<Vec<String>> {
    let mut rng = seed::rng(77);
    (0..60)
        .map(|d| {
            let theme = d % 3;
            (0..25)
                .map(|_| {
                    if rng.gen_bool(0.7) {
                        format!("t{theme}w{}", rng.gen_range(0..15))
                    } else {
                        format!("common{}", rng.gen_range(0..30))
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn training_lowers_perplexity_on_every_seed() {
    let docs = corpus();
    for s in 0..10 {
        let untrained = LdaConfig {
            iterations: 0,
            ..LdaConfig::new(3, s)
        };
        let before = train_lda(&docs, &untrained).unwrap().training_perplexity();
        let after = train_lda(
            &docs,
            &LdaConfig {
                iterations: 100,
                ..untrained
            },
        )
        .unwrap()
        .training_perplexity();
        assert!(after <= before, "seed {s}: {after} > {before}");
    }
}

#[test]
fn counts_are_conserved_after_every_sweep() {
    let docs = corpus();
    let mut sweeps = 0;
    train_lda_observed(
        &docs,
        &LdaConfig {
            iterations: 40,
            ..LdaConfig::new(4, 3)
        },
        |_, m| {
            sweeps += 1;
            m.check_invariants().unwrap();
            for k in 0..m.num_topics() {
                let total: f64 = (0..m.vocab_size()).map(|w| m.phi(k, w)).sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
        },
    )
    .unwrap();
    assert_eq!(sweeps, 40);
}

#[test]
fn heldout_perplexity_is_deterministic_and_finite() {
    let docs = corpus();
    let (train, test) = docs.split_at(50);
    let model = train_lda(
        train,
        &LdaConfig {
            iterations: 50,
            ..LdaConfig::new(3, 9)
        },
    )
    .unwrap();
    let a = model.perplexity(test, 20, 4).unwrap();
    assert!(a.is_finite() && a > 1.0);
    assert_eq!(a.to_bits(), model.perplexity(test, 20, 4).unwrap().to_bits());
}
