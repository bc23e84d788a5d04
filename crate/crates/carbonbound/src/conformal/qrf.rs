//! Quantile regression forest over lagged residuals.
//!
//! Each tree is grown CART-style on bootstrap resamples of
//! `(residuals[i-w..i] -> residuals[i])` pairs, with variance-reduction
//! splits and leaves that keep the full multiset of training targets, so
//! any conditional quantile can be read off later. Everything is seeded:
//! tree `b` draws from a ChaCha stream keyed by `seed + b`, which makes a
//! fit bit-reproducible and order-independent under tree-level parallelism.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{type1_index, ConformalError, ResidualWindow};

/// Tree-growth knobs. Defaults follow common quantile-forest practice;
/// `max_depth = 0` grows a single root leaf, which is useful for reducing
/// the forest to a plain empirical quantile in tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeGrowth {
    /// Maximum split depth; 0 means the root is a leaf.
    pub max_depth: usize,
    /// Minimum training rows in each leaf.
    pub min_leaf: usize,
    /// Draw a bootstrap resample per tree; when false every tree sees the
    /// full training set.
    pub bootstrap: bool,
}

impl Default for TreeGrowth {
    fn default() -> Self {
        TreeGrowth {
            max_depth: usize::MAX,
            min_leaf: 5,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        targets: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_targets(&self, features: &[f64]) -> &[f64] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { targets } => return targets,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if features[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }
}

/// Forest of regression trees whose leaves retain training-target multisets.
#[derive(Debug, Clone, PartialEq)]
pub struct QrfModel {
    trees: Vec<Tree>,
    lag_window: usize,
    seed: u64,
}

impl QrfModel {
    pub fn lag_window(&self) -> usize {
        self.lag_window
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}

/// Fit a quantile regression forest on the window's lagged residuals.
///
/// Training pairs are `(residuals[i-w..i] -> residuals[i])` for every valid
/// `i`, oldest first. `lag_window = 0` disables conditioning: trees have no
/// features to split on and collapse to leaves over all targets.
pub fn qrf_fit(
    window: &ResidualWindow,
    lag_window: usize,
    n_trees: usize,
    seed: u64,
    growth: TreeGrowth,
) -> Result<QrfModel, ConformalError> {
    if n_trees == 0 {
        return Err(ConformalError::BadConfig("n_trees must be >= 1".into()));
    }
    if growth.min_leaf == 0 {
        return Err(ConformalError::BadConfig("min_leaf must be >= 1".into()));
    }
    let residuals: Vec<f64> = window.iter().collect();
    if residuals.len() <= lag_window + 1 {
        return Err(ConformalError::WindowTooSmall {
            needed: lag_window + 2,
            have: residuals.len(),
        });
    }

    let n_rows = residuals.len() - lag_window;
    let data = TrainingData {
        residuals: &residuals,
        lag_window,
        n_rows,
    };

    let trees: Vec<Tree> = (0..n_trees)
        .into_par_iter()
        .map(|tree_idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(tree_idx as u64));
            grow_tree(&data, &growth, &mut rng)
        })
        .collect();

    Ok(QrfModel {
        trees,
        lag_window,
        seed,
    })
}

/// Predicted conditional quantile given the last `w` residuals.
///
/// Pools the leaf multisets reached by `recent` across trees, weighting
/// each tree equally, and returns the type-1 quantile of the pool.
pub fn qrf_quantile(model: &QrfModel, recent: &[f64], p: f64) -> Result<f64, ConformalError> {
    Ok(PooledQuantiles::from_model(model, recent)?.quantile(p))
}

struct TrainingData<'a> {
    residuals: &'a [f64],
    lag_window: usize,
    n_rows: usize,
}

impl TrainingData<'_> {
    #[inline]
    fn feature(&self, row: usize, feature: usize) -> f64 {
        self.residuals[row + feature]
    }

    #[inline]
    fn target(&self, row: usize) -> f64 {
        self.residuals[row + self.lag_window]
    }
}

fn grow_tree(data: &TrainingData<'_>, growth: &TreeGrowth, rng: &mut ChaCha8Rng) -> Tree {
    let rows: Vec<u32> = if growth.bootstrap {
        (0..data.n_rows)
            .map(|_| rng.random_range(0..data.n_rows) as u32)
            .collect()
    } else {
        (0..data.n_rows as u32).collect()
    };
    let mut tree = Tree { nodes: Vec::new() };
    split_node(data, growth, rng, rows, 0, &mut tree);
    tree
}

/// Features tried per split: ceil(w/3), at least one while features exist.
fn mtry(lag_window: usize) -> usize {
    lag_window.div_ceil(3)
}

fn split_node(
    data: &TrainingData<'_>,
    growth: &TreeGrowth,
    rng: &mut ChaCha8Rng,
    rows: Vec<u32>,
    depth: usize,
    tree: &mut Tree,
) -> u32 {
    let node_id = tree.nodes.len() as u32;
    tree.nodes.push(Node::Leaf {
        targets: Vec::new(),
    });

    let splittable =
        depth < growth.max_depth && data.lag_window > 0 && rows.len() >= 2 * growth.min_leaf;
    let best = if splittable {
        best_split(data, growth, rng, &rows)
    } else {
        None
    };

    match best {
        Some((feature, threshold, left_rows, right_rows)) => {
            let left = split_node(data, growth, rng, left_rows, depth + 1, tree);
            let right = split_node(data, growth, rng, right_rows, depth + 1, tree);
            tree.nodes[node_id as usize] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        None => {
            let targets = rows.iter().map(|&r| data.target(r as usize)).collect();
            tree.nodes[node_id as usize] = Node::Leaf { targets };
        }
    }
    node_id
}

type SplitChoice = (usize, f64, Vec<u32>, Vec<u32>);

fn best_split(
    data: &TrainingData<'_>,
    growth: &TreeGrowth,
    rng: &mut ChaCha8Rng,
    rows: &[u32],
) -> Option<SplitChoice> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| data.target(r as usize)).sum();
    let parent_score = total * total / n as f64;

    let candidates = rand::seq::index::sample(
        rng,
        data.lag_window,
        mtry(data.lag_window).min(data.lag_window),
    );

    let mut best: Option<(f64, usize, f64, usize)> = None; // (gain, feature, threshold, split_pos)
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut best_order: Vec<u32> = Vec::new();

    for feature in candidates.iter() {
        order.clear();
        order.extend_from_slice(rows);
        // ties broken by row index so the fit is reproducible
        order.sort_unstable_by(|&a, &b| {
            data.feature(a as usize, feature)
                .total_cmp(&data.feature(b as usize, feature))
                .then(a.cmp(&b))
        });

        let mut left_sum = 0.0;
        for pos in 1..n {
            left_sum += data.target(order[pos - 1] as usize);
            if pos < growth.min_leaf || n - pos < growth.min_leaf {
                continue;
            }
            let lo = data.feature(order[pos - 1] as usize, feature);
            let hi = data.feature(order[pos] as usize, feature);
            if lo == hi {
                continue;
            }
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / pos as f64 + right_sum * right_sum / (n - pos) as f64;
            let gain = score - parent_score;
            if gain > 0.0 && best.is_none_or(|(g, ..)| gain > g) {
                best = Some((gain, feature, 0.5 * (lo + hi), pos));
                best_order.clear();
                best_order.extend_from_slice(&order);
            }
        }
    }

    best.map(|(_, feature, threshold, pos)| {
        let right = best_order.split_off(pos);
        (feature, threshold, best_order, right)
    })
}

/// Leaf multisets pooled for one feature vector, ready for repeated
/// quantile reads at different probabilities.
#[derive(Debug)]
pub struct PooledQuantiles {
    values: Vec<f64>,
    /// Cumulative per-element weights; `None` when all weights are equal,
    /// in which case exact index arithmetic is used instead.
    cumulative: Option<Vec<f64>>,
}

impl PooledQuantiles {
    pub fn from_model(model: &QrfModel, recent: &[f64]) -> Result<Self, ConformalError> {
        if recent.len() != model.lag_window {
            return Err(ConformalError::LagLengthMismatch {
                expected: model.lag_window,
                got: recent.len(),
            });
        }
        let n_trees = model.trees.len() as f64;
        let mut entries: Vec<(f64, f64)> = Vec::new();
        let mut first_len: Option<usize> = None;
        let mut uniform = true;
        for tree in &model.trees {
            let targets = tree.leaf_targets(recent);
            match first_len {
                None => first_len = Some(targets.len()),
                Some(len) => uniform &= len == targets.len(),
            }
            let weight = 1.0 / (n_trees * targets.len() as f64);
            entries.extend(targets.iter().map(|&t| (t, weight)));
        }
        entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let values: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let cumulative = if uniform {
            None
        } else {
            let mut acc = 0.0;
            Some(
                entries
                    .iter()
                    .map(|e| {
                        acc += e.1;
                        acc
                    })
                    .collect(),
            )
        };
        Ok(PooledQuantiles { values, cumulative })
    }

    /// Type-1 quantile of the pooled, per-tree-equally-weighted multiset.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        if p <= 0.0 {
            return self.values[0];
        }
        if p >= 1.0 {
            return self.values[n - 1];
        }
        match &self.cumulative {
            None => self.values[type1_index(n, p)],
            Some(cum) => {
                let total = cum[n - 1];
                let idx = cum.partition_point(|&c| c < p * total).min(n - 1);
                self.values[idx]
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
