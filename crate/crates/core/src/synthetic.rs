//! Seeded synthetic data for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::corpus::{Document, Label, LabeledDataset, Source};
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

/// `n` points in `[0, 1]^dim` labeled by a random hyperplane, with points
/// closer than 0.1 to the plane rejected. Labels alternate so both classes
/// have `n / 2` members (rounded up for misinformation).
pub fn linearly_separable(n: usize, dim: usize, seed: u64) -> (FeatureMatrix, Vec<Label>) {
    let mut rng = seed::rng(seed);
    let w: Vec<f64> = loop {
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if w.iter().map(|v| v * v).sum::<f64>() > 0.25 {
            break w;
        }
    };
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b: f64 = w.iter().sum::<f64>() * 0.5;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while rows.len() < n {
        let want = if rows.len() % 2 == 0 { 1.0 } else { -1.0 };
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let margin = (x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() - b) / norm;
        if margin.abs() < 0.1 || margin.signum() != want {
            continue;
        }
        labels.push(if want > 0.0 {
            Label::Misinformation
        } else {
            Label::NoMisinformation
        });
        rows.push(SparseVector::from_dense(&x));
    }
    (FeatureMatrix::new(rows, dim).expect("rows match dim"), labels)
}

/// Per-source label counts `[source][label]`: twitter 36/250, facebook 577/182.
pub const DEFAULT_COUNTS: [[usize; 2]; 2] = [[36, 250], [577, 182]];

pub const COVID_TERMS: [&str; 9] = [
    "corona",
    "virus",
    "obulwadde",
    "ekilwadde",
    "coronavirus",
    "covid19",
    "kolona",
    "covid",
    "ssenyiga",
];

fn pseudo_word(rng: &mut seed::Rng, syllables: usize) -> String {
    const C: &[&str] = &[
        "b", "g", "k", "l", "m", "n", "s", "t", "w", "y", "z", "ny", "gg", "kk", "mb", "nd",
    ];
    const V: &[&str] = &["a", "e", "i", "o", "u"];
    let mut s = String::new();
    for _ in 0..syllables {
        s.push_str(C.choose(rng).unwrap());
        s.push_str(V.choose(rng).unwrap());
    }
    s
}

fn pool(rng: &mut seed::Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| {
            let syllables = rng.gen_range(2..5);
            pseudo_word(rng, syllables)
        })
        .collect()
}

/// A noisy code-mixed-looking corpus with label-dependent vocabulary.
/// Raw texts contain mentions, URLs, retweet markers, punctuation and emoji
/// so the cleaning rules have something to do. `signal` in `[0, 1]` is the
/// chance that a token is drawn from the label's own word pool.
pub fn surrogate_corpus(counts: [[usize; 2]; 2], signal: f64, seed: u64) -> LabeledDataset {
    let mut rng = seed::rng(seed);
    let english = [
        "the",
        "is",
        "and",
        "to",
        "of",
        "in",
        "people",
        "government",
        "news",
        "vaccine",
        "lockdown",
        "cure",
        "masks",
        "hospital",
        "minister",
        "test",
        "cases",
        "stay",
        "home",
        "uganda",
    ];
    let shared = pool(&mut rng, 400);
    let label_pools = [pool(&mut rng, 120), pool(&mut rng, 120)];
    let source_pools = [pool(&mut rng, 60), pool(&mut rng, 60)];

    let mut plan: Vec<(Source, Label)> = Vec::new();
    for source in Source::ALL {
        for label in Label::ALL {
            plan.extend(std::iter::repeat_n(
                (source, label),
                counts[source.index()][label.index()],
            ));
        }
    }
    plan.shuffle(&mut rng);

    let mut documents = Vec::with_capacity(plan.len());
    for (i, (source, label)) in plan.into_iter().enumerate() {
        let len = rng.gen_range(6..24);
        let mut tokens: Vec<String> = Vec::with_capacity(len + 3);
        if source == Source::Twitter && rng.gen_bool(0.3) {
            tokens.push("RT".into());
            tokens.push(format!("@user{}", rng.gen_range(0..50)));
        }
        for _ in 0..len {
            let u: f64 = rng.gen();
            let word = if u < signal {
                label_pools[label.index()].choose(&mut rng).unwrap().clone()
            } else if u < signal + 0.1 {
                COVID_TERMS.choose(&mut rng).unwrap().to_string()
            } else if u < signal + 0.2 {
                english.choose(&mut rng).unwrap().to_string()
            } else if u < signal + 0.3 {
                source_pools[source.index()].choose(&mut rng).unwrap().clone()
            } else if u < 0.97 {
                shared.choose(&mut rng).unwrap().clone()
            } else {
                pseudo_word(&mut rng, 5)
            };
            tokens.push(word);
        }
        if rng.gen_bool(0.2) {
            tokens.push(format!("https://t.co/{}", pseudo_word(&mut rng, 3)));
        }
        if rng.gen_bool(0.1) {
            tokens.push("\u{1F637}".into());
        }
        let mut text = tokens.join(" ");
        if rng.gen_bool(0.3) {
            text.push('!');
        }
        if rng.gen_bool(0.2) {
            text = text.replacen(' ', " &amp; ", 1);
        }
        documents.push(Document {
            id: format!("{i:05}"),
            text,
            source,
            label: Some(label),
        });
    }
    LabeledDataset::new(documents).expect("generated documents are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::compute_stats;

    #[test]
    fn separable_set_is_balanced_and_deterministic() {
        let (x, y) = linearly_separable(101, 3, 1);
        assert_eq!(x.n_rows(), 101);
        assert_eq!(y.iter().filter(|l| **l == Label::Misinformation).count(), 51);
        assert_eq!(linearly_separable(101, 3, 1).0, x);
    }

    #[test]
    fn surrogate_matches_requested_counts() {
        let ds = surrogate_corpus(DEFAULT_COUNTS, 0.15, 3);
        let stats = compute_stats(&ds).unwrap();
        assert_eq!(stats.total, 1045);
        assert_eq!(stats.count(Source::Twitter, Label::Misinformation), 36);
        assert_eq!(stats.count(Source::Facebook, Label::NoMisinformation), 182);
        assert_eq!(ds, surrogate_corpus(DEFAULT_COUNTS, 0.15, 3));
    }
}
