//! Binary decision trees over multi-hot features.
//!
//! A split is just a feature index: rows with the bit clear go left, rows
//! with it set go right. Growth is greedy and depth-first. A node becomes a
//! leaf when it is pure, hits the depth cap, has fewer than
//! `min_samples_split` rows, or has no split leaving `min_samples_leaf` rows
//! on both sides. Among valid splits the best-scoring one wins, ties going to
//! the lowest feature index; zero-gain splits are accepted so that
//! interaction patterns like XOR remain learnable.

use serde::{Deserialize, Serialize};

use super::params::MaxFeatures;
use crate::dataset::{LabeledDataset, SymptomVector};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<L> {
    Split {
        feature: usize,
        left: usize,
        right: usize,
    },
    Leaf {
        value: L,
    },
}

/// Flat tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<L> {
    pub nodes: Vec<Node<L>>,
}

/// Regression tree whose leaves carry an additive score.
pub type RegressionTree = DecisionTree<f64>;
/// Classification tree whose leaves carry per-class training counts.
pub type ClassificationTree = DecisionTree<Vec<u32>>;

impl<L> DecisionTree<L> {
    pub fn leaf_by(&self, bit: impl Fn(usize) -> bool) -> &L {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    left,
                    right,
                } => idx = if bit(*feature) { *right } else { *left },
                Node::Leaf { value } => return value,
            }
        }
    }

    pub fn leaf(&self, x: &SymptomVector) -> &L {
        self.leaf_by(|f| x.get(f))
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk<L>(t: &DecisionTree<L>, idx: usize) -> usize {
            match &t.nodes[idx] {
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

impl ClassificationTree {
    /// Leaf class distribution normalised to sum to 1.
    pub fn predict_proba(&self, x: &SymptomVector) -> Vec<f64> {
        normalise_counts(self.leaf(x))
    }
}

pub(crate) fn normalise_counts(counts: &[u32]) -> Vec<f64> {
    let total: u32 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| f64::from(c) / f64::from(total.max(1)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConstraints {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeConstraints {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
        }
    }
}

/// Dense and sparse views of a binary design matrix.
#[derive(Debug, Clone)]
pub(crate) struct BinaryMatrix {
    n_features: usize,
    dense: Vec<u8>,
    active: Vec<Vec<u32>>,
}

impl BinaryMatrix {
    pub fn from_dataset(ds: &LabeledDataset) -> Self {
        let n_features = ds.n_features();
        let mut dense = Vec::with_capacity(ds.len() * n_features);
        let mut active = Vec::with_capacity(ds.len());
        for (x, _) in ds.samples() {
            dense.extend_from_slice(x.bits());
            active.push(x.active().map(|i| i as u32).collect());
        }
        Self {
            n_features,
            dense,
            active,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.active.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn bit(&self, row: usize, feature: usize) -> bool {
        self.dense[row * self.n_features + feature] == 1
    }

    #[inline]
    pub fn active(&self, row: usize) -> &[u32] {
        &self.active[row]
    }
}

/// What a tree optimises. Node statistics are a fixed-width vector of sums
/// that is additive over rows, so the bit-clear side of a split is the
/// parent minus the bit-set side.
pub(crate) trait SplitObjective {
    type Leaf;

    fn width(&self) -> usize;
    fn accumulate(&self, row: usize, stats: &mut [f64]);
    fn is_pure(&self, stats: &[f64], n: usize) -> bool;
    /// Node quality; split gain is `score(left) + score(right) - score(parent)`.
    fn score(&self, stats: &[f64], n: usize) -> f64;
    fn leaf(&self, stats: &[f64], n: usize) -> Self::Leaf;
}

/// Squared-error regression on gradient-boosting residuals with a single
/// Newton step per leaf: `lr * sum(r) / max(sum(|r|(1-|r|)), 1e-12)`.
pub(crate) struct NewtonResidual<'a> {
    pub residual: &'a [f64],
    pub learning_rate: f64,
}

pub(crate) const NEWTON_DENOMINATOR_FLOOR: f64 = 1e-12;

impl SplitObjective for NewtonResidual<'_> {
    type Leaf = f64;

    fn width(&self) -> usize {
        3
    }

    fn accumulate(&self, row: usize, stats: &mut [f64]) {
        let r = self.residual[row];
        let a = r.abs();
        stats[0] += r;
        stats[1] += r * r;
        stats[2] += a * (1.0 - a);
    }

    fn is_pure(&self, stats: &[f64], n: usize) -> bool {
        let sse = stats[1] - stats[0] * stats[0] / n as f64;
        sse <= 1e-12 * (1.0 + stats[1])
    }

    fn score(&self, stats: &[f64], n: usize) -> f64 {
        stats[0] * stats[0] / n as f64
    }

    fn leaf(&self, stats: &[f64], _n: usize) -> f64 {
        self.learning_rate * stats[0] / stats[2].max(NEWTON_DENOMINATOR_FLOOR)
    }
}

/// Information gain (entropy) over class labels.
pub(crate) struct Entropy<'a> {
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl SplitObjective for Entropy<'_> {
    type Leaf = Vec<u32>;

    fn width(&self) -> usize {
        self.n_classes
    }

    fn accumulate(&self, row: usize, stats: &mut [f64]) {
        stats[self.labels[row]] += 1.0;
    }

    fn is_pure(&self, stats: &[f64], n: usize) -> bool {
        stats.iter().any(|&c| c as usize == n)
    }

    // -n * H(node), so the split gain equals n_parent * information gain.
    fn score(&self, stats: &[f64], n: usize) -> f64 {
        let n = n as f64;
        stats
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| c * (c / n).ln())
            .sum()
    }

    fn leaf(&self, stats: &[f64], _n: usize) -> Vec<u32> {
        stats.iter().map(|&c| c as u32).collect()
    }
}

/// Grows one tree on `rows` of `data`.
pub(crate) fn grow<O: SplitObjective>(
    data: &BinaryMatrix,
    rows: Vec<usize>,
    constraints: &TreeConstraints,
    objective: &O,
    rng: &mut SplitMix64,
) -> DecisionTree<O::Leaf> {
    let width = objective.width();
    let n_features = data.n_features();
    let feature_budget = constraints.max_features.count(n_features);
    let min_leaf = constraints.min_samples_leaf.max(1);

    let mut nodes: Vec<Option<Node<O::Leaf>>> = vec![None];
    let mut stack = vec![(0usize, rows, 0usize)];
    let mut hist = vec![0.0f64; n_features * width];
    let mut ones = vec![0usize; n_features];
    let mut order: Vec<usize> = (0..n_features).collect();
    let mut right = vec![0.0f64; width];
    let mut left = vec![0.0f64; width];

    while let Some((idx, node_rows, depth)) = stack.pop() {
        let n = node_rows.len();
        let mut stats = vec![0.0f64; width];
        for &r in &node_rows {
            objective.accumulate(r, &mut stats);
        }
        let depth_capped = constraints.max_depth.is_some_and(|d| depth >= d);
        if depth_capped
            || n < constraints.min_samples_split
            || n < 2 * min_leaf
            || objective.is_pure(&stats, n)
        {
            nodes[idx] = Some(Node::Leaf {
                value: objective.leaf(&stats, n),
            });
            continue;
        }

        hist.iter_mut().for_each(|v| *v = 0.0);
        ones.iter_mut().for_each(|v| *v = 0);
        for &r in &node_rows {
            for &f in data.active(r) {
                let f = f as usize;
                ones[f] += 1;
                objective.accumulate(r, &mut hist[f * width..(f + 1) * width]);
            }
        }

        let parent_score = objective.score(&stats, n);
        let sampling = feature_budget < n_features;
        if sampling {
            for (i, v) in order.iter_mut().enumerate() {
                *v = i;
            }
        }
        let mut best: Option<(usize, f64)> = None;
        let mut evaluated = 0;
        for pos in 0..n_features {
            if sampling && evaluated >= feature_budget {
                break;
            }
            let f = if sampling {
                let j = pos + rng.below(n_features - pos);
                order.swap(pos, j);
                order[pos]
            } else {
                pos
            };
            let n1 = ones[f];
            if n1 == 0 || n1 == n {
                continue;
            }
            evaluated += 1;
            let n0 = n - n1;
            if n1 < min_leaf || n0 < min_leaf {
                continue;
            }
            right.copy_from_slice(&hist[f * width..(f + 1) * width]);
            for k in 0..width {
                left[k] = stats[k] - right[k];
            }
            let gain = objective.score(&left, n0) + objective.score(&right, n1) - parent_score;
            best = match best {
                None => Some((f, gain)),
                Some((bf, bg)) => {
                    let tol = 1e-12 * (1.0 + bg.abs());
                    if gain > bg + tol || (gain >= bg - tol && f < bf) {
                        Some((f, gain))
                    } else {
                        Some((bf, bg))
                    }
                }
            };
        }

        match best {
            None => {
                nodes[idx] = Some(Node::Leaf {
                    value: objective.leaf(&stats, n),
                });
            }
            Some((feature, _)) => {
                let (r_rows, l_rows): (Vec<usize>, Vec<usize>) =
                    node_rows.into_iter().partition(|&r| data.bit(r, feature));
                let left_idx = nodes.len();
                let right_idx = left_idx + 1;
                nodes.push(None);
                nodes.push(None);
                nodes[idx] = Some(Node::Split {
                    feature,
                    left: left_idx,
                    right: right_idx,
                });
                stack.push((right_idx, r_rows, depth + 1));
                stack.push((left_idx, l_rows, depth + 1));
            }
        }
    }

    DecisionTree {
        nodes: nodes
            .into_iter()
            .map(|n| n.expect("every node is resolved"))
            .collect(),
    }
}

/// Grows a single entropy-split classification tree on the whole dataset.
/// With `MaxFeatures::All` the seed has no effect.
pub fn fit_classification_tree(
    ds: &LabeledDataset,
    constraints: &TreeConstraints,
    seed: u64,
) -> ClassificationTree {
    let data = BinaryMatrix::from_dataset(ds);
    let labels = ds.targets();
    let objective = Entropy {
        labels: &labels,
        n_classes: ds.n_classes(),
    };
    let mut rng = SplitMix64::derive(seed, &[0]);
    grow(&data, (0..ds.len()).collect(), constraints, &objective, &mut rng)
}
