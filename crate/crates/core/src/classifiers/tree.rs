//! Binary decision trees over numeric features.
//!
//! Each internal node tests `x[feature] <= threshold`. Two growth modes share
//! the builder: C4.5 (gain ratio restricted to above-average-gain splits,
//! followed by pessimistic-error subtree replacement) and the randomized
//! information-gain trees used by the forest.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{C45Params, Prediction};
use crate::corpus::Label;
use crate::featurize::{FeatureMatrix, SparseVector};
use crate::seed;

const MIN_GAIN: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Class weight reaching the node, by label index.
        dist: [f64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        dist: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    /// Arena with the root at index 0.
    pub nodes: Vec<Node>,
}

impl TreeModel {
    /// Class distribution of the leaf `x` falls into, normalized.
    pub fn distribution(&self, x: &SparseVector) -> [f64; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { dist } => return normalized(*dist),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x.get(*feature) <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Prediction {
        Prediction::from_scores(self.distribution(x), true)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Leaf class weights, in arena order.
    pub fn leaf_weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { dist } => Some(dist[0] + dist[1]),
                _ => None,
            })
            .collect()
    }
}

fn normalized(d: [f64; 2]) -> [f64; 2] {
    let s = d[0] + d[1];
    if s > 0.0 {
        [d[0] / s, d[1] / s]
    } else {
        [0.5, 0.5]
    }
}

fn entropy(d: [f64; 2]) -> f64 {
    let s = d[0] + d[1];
    if s <= 0.0 {
        return 0.0;
    }
    d.iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / s;
            -p * p.log2()
        })
        .sum()
}

/// Information gain of splitting `parent` into `left` and the remainder.
pub fn info_gain(parent: [f64; 2], left: [f64; 2]) -> f64 {
    let right = [parent[0] - left[0], parent[1] - left[1]];
    let (wl, wr) = (left[0] + left[1], right[0] + right[1]);
    let total = wl + wr;
    entropy(parent) - (wl * entropy(left) + wr * entropy(right)) / total
}

/// Entropy of the split proportions themselves.
pub fn split_info(parent: [f64; 2], left: [f64; 2]) -> f64 {
    let wl = left[0] + left[1];
    let total = parent[0] + parent[1];
    entropy([wl, total - wl])
}

/// Pessimistic extra errors for a leaf covering `n` weight with `e` errors
/// at confidence `cf` (upper limit of the binomial interval, normal approx).
pub fn added_errors(n: f64, e: f64, cf: f64) -> f64 {
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    r * n - e
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Criterion {
    /// C4.5: best gain ratio among splits with at least average gain.
    GainRatio,
    /// Best information gain over random features; more features are drawn
    /// past `features_per_split` until one yields a positive gain.
    RandomInfoGain { features_per_split: usize },
}

pub(crate) struct GrowParams {
    pub criterion: Criterion,
    pub min_leaf: f64,
    pub max_depth: Option<usize>,
    /// Pruning confidence; `None` leaves the tree unpruned.
    pub prune_confidence: Option<f64>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [Label],
    w: &'a [f64],
    params: &'a GrowParams,
    rng: Option<seed::Rng>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn class_dist(&self, idx: &[usize]) -> [f64; 2] {
        let mut d = [0.0; 2];
        for &i in idx {
            d[self.y[i].index()] += self.w[i];
        }
        d
    }

    /// Nonzero entries at this node grouped by feature, each group sorted by value.
    fn feature_groups(&self, idx: &[usize]) -> Vec<(usize, Vec<(f64, usize, f64)>)> {
        let mut entries: Vec<(usize, f64, usize, f64)> = Vec::new();
        for &i in idx {
            for (f, v) in self.x.row(i).iter() {
                entries.push((f, v, self.y[i].index(), self.w[i]));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut groups: Vec<(usize, Vec<(f64, usize, f64)>)> = Vec::new();
        for (f, v, c, w) in entries {
            match groups.last_mut() {
                Some((g, list)) if *g == f => list.push((v, c, w)),
                _ => groups.push((f, vec![(v, c, w)])),
            }
        }
        groups
    }

    /// Best threshold for one feature by information gain.
    fn best_threshold(&self, feature: usize, nonzero: &[(f64, usize, f64)], parent: [f64; 2]) -> Option<Candidate> {
        let mut zero = parent;
        for &(_, c, w) in nonzero {
            zero[c] -= w;
        }
        let zero_present = zero[0] + zero[1] > 1e-12;
        // Distinct values in ascending order with their class weights.
        let mut distinct: Vec<(f64, [f64; 2])> = Vec::new();
        let mut zero_done = !zero_present;
        for &(v, c, w) in nonzero {
            if !zero_done && v > 0.0 {
                distinct.push((0.0, zero));
                zero_done = true;
            }
            match distinct.last_mut() {
                Some((last, d)) if *last == v => d[c] += w,
                _ => {
                    let mut d = [0.0; 2];
                    d[c] += w;
                    distinct.push((v, d));
                }
            }
        }
        if !zero_done {
            distinct.push((0.0, zero));
        }
        let total = parent[0] + parent[1];
        let mut left = [0.0; 2];
        let mut best: Option<Candidate> = None;
        for k in 0..distinct.len().saturating_sub(1) {
            left[0] += distinct[k].1[0];
            left[1] += distinct[k].1[1];
            let wl = left[0] + left[1];
            if wl < self.params.min_leaf || total - wl < self.params.min_leaf {
                continue;
            }
            let gain = info_gain(parent, left);
            if gain > best.as_ref().map_or(MIN_GAIN, |b| b.gain) {
                let si = split_info(parent, left);
                best = Some(Candidate {
                    feature,
                    threshold: (distinct[k].0 + distinct[k + 1].0) / 2.0,
                    gain,
                    ratio: if si > 0.0 { gain / si } else { 0.0 },
                });
            }
        }
        best
    }

    fn choose_split(&mut self, idx: &[usize], parent: [f64; 2]) -> Option<Candidate> {
        let groups = self.feature_groups(idx);
        match self.params.criterion {
            Criterion::GainRatio => {
                let candidates: Vec<Candidate> = groups
                    .iter()
                    .filter_map(|(f, list)| self.best_threshold(*f, list, parent))
                    .collect();
                if candidates.is_empty() {
                    return None;
                }
                let mean = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
                let mut best: Option<Candidate> = None;
                for c in candidates {
                    if c.gain >= mean - 1e-3 && best.as_ref().is_none_or(|b| c.ratio > b.ratio) {
                        best = Some(c);
                    }
                }
                best
            }
            Criterion::RandomInfoGain { features_per_split } => {
                let dim = self.perm.len();
                let mut rng = self.rng.take().expect("random trees need an rng");
                let mut best: Option<Candidate> = None;
                for drawn in 0..dim {
                    if drawn >= features_per_split && best.is_some() {
                        break;
                    }
                    let j = rng.gen_range(drawn..dim);
                    self.perm.swap(drawn, j);
                    let f = self.perm[drawn];
                    let Ok(g) = groups.binary_search_by_key(&f, |(g, _)| *g) else {
                        continue;
                    };
                    if let Some(c) = self.best_threshold(f, &groups[g].1, parent) {
                        let better = match &best {
                            None => true,
                            Some(b) => c.gain > b.gain || (c.gain == b.gain && c.feature < b.feature),
                        };
                        if better {
                            best = Some(c);
                        }
                    }
                }
                self.rng = Some(rng);
                best
            }
        }
    }

    /// Grows the subtree for `idx` and returns its arena index.
    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let dist = self.class_dist(idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { dist });
        let total = dist[0] + dist[1];
        let pure = dist[0] <= 0.0 || dist[1] <= 0.0;
        if pure || total < 2.0 * self.params.min_leaf || self.params.max_depth.is_some_and(|d| depth >= d) {
            return at;
        }
        let Some(split) = self.choose_split(idx, dist) else {
            return at;
        };
        let (li, ri): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.row(i).get(split.feature) <= split.threshold);
        let left = self.grow(&li, depth + 1);
        let right = self.grow(&ri, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            dist,
        };
        if let Some(cf) = self.params.prune_confidence {
            let as_leaf = leaf_estimate(dist, cf);
            if as_leaf <= self.subtree_estimate(at, cf) + 0.1 {
                // Descendants sit contiguously after `at`.
                self.nodes.truncate(at + 1);
                self.nodes[at] = Node::Leaf { dist };
            }
        }
        at
    }

    fn subtree_estimate(&self, at: usize, cf: f64) -> f64 {
        match &self.nodes[at] {
            Node::Leaf { dist } => leaf_estimate(*dist, cf),
            Node::Split { left, right, .. } => self.subtree_estimate(*left, cf) + self.subtree_estimate(*right, cf),
        }
    }
}

fn leaf_estimate(dist: [f64; 2], cf: f64) -> f64 {
    let n = dist[0] + dist[1];
    if n <= 0.0 {
        return 0.0;
    }
    let errors = n - dist[0].max(dist[1]);
    errors + added_errors(n, errors, cf)
}

pub(crate) fn grow_tree(
    x: &FeatureMatrix,
    y: &[Label],
    idx: &[usize],
    w: &[f64],
    params: &GrowParams,
    rng: Option<seed::Rng>,
) -> TreeModel {
    let mut b = Builder {
        x,
        y,
        w,
        params,
        rng,
        perm: (0..x.dim()).collect(),
        nodes: Vec::new(),
    };
    b.grow(idx, 0);
    let mut tree = TreeModel { nodes: b.nodes };
    fill_empty_leaves(&mut tree);
    tree
}

/// Leaves with no weight (possible only with zero instance weights) take
/// their parent's distribution.
fn fill_empty_leaves(tree: &mut TreeModel) {
    for at in 0..tree.nodes.len() {
        if let Node::Split { left, right, dist, .. } = tree.nodes[at] {
            for child in [left, right] {
                if let Node::Leaf { dist: d } = &mut tree.nodes[child] {
                    if d[0] + d[1] <= 0.0 {
                        *d = dist;
                    }
                }
            }
        }
    }
}

pub(super) fn fit_c45(x: &FeatureMatrix, y: &[Label], w: Option<&[f64]>, params: &C45Params) -> TreeModel {
    let ones;
    let w = match w {
        Some(w) => w,
        None => {
            ones = vec![1.0; y.len()];
            &ones
        }
    };
    let idx: Vec<usize> = (0..y.len()).collect();
    let grow = GrowParams {
        criterion: Criterion::GainRatio,
        min_leaf: params.min_leaf as f64,
        max_depth: params.max_depth,
        prune_confidence: params.prune.then_some(params.confidence),
    };
    grow_tree(x, y, &idx, w, &grow, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Misinformation as M, NoMisinformation as N};

    fn c45(min_leaf: usize, prune: bool) -> C45Params {
        C45Params {
            min_leaf,
            prune,
            ..C45Params::default()
        }
    }

    #[test]
    fn entropy_and_gain_by_hand() {
        // Parent [2, 2]: H = 1. Left [2, 0], right [0, 2]: gain 1, split info 1.
        assert!((info_gain([2.0, 2.0], [2.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((split_info([2.0, 2.0], [2.0, 0.0]) - 1.0).abs() < 1e-12);
        // Parent [3, 1], left [1, 1]: 0.811278 - 0.5 * 1.
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((info_gain([3.0, 1.0], [1.0, 1.0]) - (h - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn added_errors_match_reference_values() {
        // Frozen from an independent implementation with scipy's normal quantile.
        assert!((added_errors(10.0, 2.0, 0.25) - 1.518_577_506_615_758_7).abs() < 1e-9);
        assert!((added_errors(6.0, 0.0, 0.25) - 1.237_796_844_095_401_2).abs() < 1e-12);
        assert!((added_errors(5.0, 0.5, 0.25) - 1.230_520_569_222_272_7).abs() < 1e-9);
        assert!((added_errors(14.0, 5.0, 0.25) - 1.761_119_807_272_967_5).abs() < 1e-9);
        assert_eq!(added_errors(3.0, 3.0, 0.25), 0.0);
    }

    #[test]
    fn learns_one_dimensional_threshold() {
        let x = FeatureMatrix::from_dense(&[vec![0.1], vec![0.2], vec![0.3], vec![0.7], vec![0.8], vec![0.9]]).unwrap();
        let y = [N, N, N, M, M, M];
        let t = fit_c45(&x, &y, None, &c45(1, false));
        assert_eq!(t.n_leaves(), 2);
        match &t.nodes[0] {
            Node::Split { threshold, .. } => assert!((threshold - 0.5).abs() < 1e-12),
            _ => panic!("expected a split"),
        }
        assert_eq!(t.predict(&SparseVector::from_dense(&[0.6])).label, M);
    }

    #[test]
    fn sparse_zero_values_participate() {
        // Feature 0 is present only on misinformation rows.
        let x = FeatureMatrix::from_dense(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let y = [M, M, N, N];
        let t = fit_c45(&x, &y, None, &c45(1, false));
        for (r, l) in x.rows().iter().zip(y) {
            assert_eq!(t.predict(r).label, l);
        }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![2.0]]).unwrap();
        let t = fit_c45(&x, &[M, M], None, &c45(1, true));
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(x.row(0)).scores, [1.0, 0.0]);
    }

    fn noisy(n: usize, seed: u64) -> (FeatureMatrix, Vec<Label>) {
        let mut rng = seed::rng(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let row: Vec<f64> = (0..6).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
            let signal = row[0] == 1.0;
            let flip = rng.gen_bool(0.2);
            y.push(if signal != flip { M } else { N });
            rows.push(row);
        }
        (FeatureMatrix::from_dense(&rows).unwrap(), y)
    }

    #[test]
    fn pruning_shrinks_noisy_trees() {
        let (x, y) = noisy(300, 5);
        let full = fit_c45(&x, &y, None, &c45(2, false));
        let pruned = fit_c45(&x, &y, None, &c45(2, true));
        assert!(pruned.n_leaves() < full.n_leaves());
        // The signal feature survives at the root.
        match &pruned.nodes[0] {
            Node::Split { feature, .. } => assert_eq!(*feature, 0),
            _ => panic!("pruned to a stump"),
        }
    }

    #[test]
    fn max_depth_is_respected() {
        let (x, y) = noisy(200, 9);
        let p = C45Params {
            max_depth: Some(2),
            ..c45(1, false)
        };
        assert!(fit_c45(&x, &y, None, &p).depth() <= 2);
    }

    #[test]
    fn instance_weights_shift_the_leaf() {
        let x = FeatureMatrix::from_dense(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let y = [M, N, N];
        let t = fit_c45(&x, &y, Some(&[5.0, 1.0, 1.0]), &c45(1, true));
        assert_eq!(t.predict(x.row(0)).label, M);
    }

    proptest! {
        #[test]
        fn leaves_respect_min_leaf(seed in 0u64..500, min_leaf in 1usize..6) {
            let (x, y) = noisy(60, seed);
            let t = fit_c45(&x, &y, None, &c45(min_leaf, false));
            if t.nodes.len() > 1 {
                for w in t.leaf_weights() {
                    prop_assert!(w >= min_leaf as f64);
                }
            }
            let total: f64 = t.leaf_weights().iter().sum();
            prop_assert!((total - 60.0).abs() < 1e-9);
        }
    }
}
