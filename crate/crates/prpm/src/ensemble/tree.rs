//! Depth-limited CART member learner.
//!
//! Each tree greedily splits on the (feature, threshold) pair with the best
//! information gain, over a per-node random feature subset. Leaves hold the
//! Laplace-smoothed fraction of negative-outcome rows, so predictions stay
//! strictly inside (0, 1) and entropies stay finite.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::entropy;

/// Member-learner hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf_count: usize,
    /// Fraction of features offered at each node, sampled without replacement.
    pub feature_subsample: f64,
    /// Fraction of rows drawn (with replacement) into each member's bootstrap.
    pub row_subsample: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 6,
            min_leaf_count: 5,
            feature_subsample: 0.8,
            row_subsample: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        prob: f64,
    },
}

/// A fitted tree, stored as a pre-order arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

const MIN_GAIN: f64 = 1e-12;
const PROB_FLOOR: f64 = 1e-6;

impl DecisionTree {
    /// Build a tree from explicit nodes (root at index 0).
    pub fn from_nodes(nodes: Vec<Node>) -> DecisionTree {
        assert!(!nodes.is_empty(), "a tree needs at least one node");
        DecisionTree { nodes }
    }

    /// Fit on rows of `features` with binary labels (`true` = negative
    /// outcome, the event being predicted). Deterministic given `rng` state.
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[bool],
        params: &TreeParams,
        rng: &mut ChaCha8Rng,
    ) -> DecisionTree {
        assert_eq!(features.len(), labels.len());
        assert!(!features.is_empty(), "cannot fit a tree on zero rows");
        let rows: Vec<usize> = (0..labels.len()).collect();
        let mut nodes = Vec::new();
        grow(features, labels, rows, 0, params, rng, &mut nodes);
        DecisionTree { nodes }
    }

    /// Leaf probability for one feature vector, clamped into
    /// `[1e-6, 1 - 1e-6]` so downstream entropies never hit log(0).
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { prob } => return prob.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

fn grow(
    features: &[Vec<f64>],
    labels: &[bool],
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = rows.len();
    let pos = rows.iter().filter(|&&i| labels[i]).count();

    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            prob: (pos + 1) as f64 / (n + 2) as f64,
        });
        nodes.len() - 1
    };

    if depth >= params.max_depth || n < 2 * params.min_leaf_count || pos == 0 || pos == n {
        return make_leaf(nodes);
    }

    let d = features[rows[0]].len();
    let k = ((params.feature_subsample * d as f64).ceil() as usize).clamp(1, d);
    let mut subset = index::sample(rng, d, k).into_vec();
    subset.sort_unstable();

    let h_parent = entropy(pos as f64 / n as f64);
    let mut best: Option<(usize, f64)> = None;
    let mut best_gain = 0.0;
    let mut sorted: Vec<(f64, bool)> = Vec::with_capacity(n);
    for &f in &subset {
        sorted.clear();
        sorted.extend(rows.iter().map(|&i| (features[i][f], labels[i])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_pos = 0usize;
        for i in 0..n - 1 {
            if sorted[i].1 {
                left_pos += 1;
            }
            if sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let nl = i + 1;
            let nr = n - nl;
            if nl < params.min_leaf_count || nr < params.min_leaf_count {
                continue;
            }
            let h_left = entropy(left_pos as f64 / nl as f64);
            let h_right = entropy((pos - left_pos) as f64 / nr as f64);
            let gain = h_parent - (nl as f64 * h_left + nr as f64 * h_right) / n as f64;
            // Strict improvement only: ties keep the lowest feature index and
            // then the lowest threshold, because the scan visits them first.
            if gain > best_gain {
                best_gain = gain;
                best = Some((f, (sorted[i].0 + sorted[i + 1].0) / 2.0));
            }
        }
    }

    let Some((feature, threshold)) = best else {
        return make_leaf(nodes);
    };
    if best_gain <= MIN_GAIN {
        return make_leaf(nodes);
    }

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&i| features[i][feature] < threshold);

    let idx = nodes.len();
    nodes.push(Node::Leaf { prob: f64::NAN }); // placeholder until children exist
    let left = grow(features, labels, left_rows, depth + 1, params, rng, nodes);
    let right = grow(features, labels, right_rows, depth + 1, params, rng, nodes);
    nodes[idx] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    idx
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<bool>) {
        let features: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 / 59.0]).collect();
        let labels: Vec<bool> = features.iter().map(|x| x[0] > 0.5).collect();
        (features, labels)
    }

    #[test]
    fn separable_data_is_learned() {
        let (features, labels) = separable();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tree = DecisionTree::fit(&features, &labels, &TreeParams::default(), &mut rng);
        let correct = features
            .iter()
            .zip(&labels)
            .filter(|(x, &y)| (tree.predict(x) > 0.5) == y)
            .count();
        assert!(correct as f64 / labels.len() as f64 >= 0.9);
    }

    #[test]
    fn fitting_is_deterministic_per_seed() {
        let (features, labels) = separable();
        let fit = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DecisionTree::fit(&features, &labels, &TreeParams::default(), &mut rng)
        };
        assert_eq!(fit(3), fit(3));
    }

    #[test]
    fn pure_node_is_a_single_leaf() {
        let features = vec![vec![0.0], vec![1.0], vec![2.0]];
        let labels = vec![true, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = DecisionTree::fit(&features, &labels, &TreeParams::default(), &mut rng);
        assert_eq!(tree.node_count(), 1);
        // Laplace: (3 + 1) / (3 + 2)
        assert_eq!(tree.predict(&[0.0]), 0.8);
    }

    #[test]
    fn min_leaf_count_blocks_thin_splits() {
        // 6 rows, min leaf 5: no split can give both sides >= 5.
        let features: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let labels = vec![false, false, false, true, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = DecisionTree::fit(&features, &labels, &TreeParams::default(), &mut rng);
        assert_eq!(tree.node_count(), 1);
    }

    #[test]
    fn predictions_stay_strictly_inside_unit_interval() {
        let tree = DecisionTree::from_nodes(vec![Node::Leaf { prob: 1.0 }]);
        assert_eq!(tree.predict(&[0.0]), 1.0 - 1e-6);
        let tree = DecisionTree::from_nodes(vec![Node::Leaf { prob: 0.0 }]);
        assert_eq!(tree.predict(&[0.0]), 1e-6);
    }

    #[test]
    fn hand_built_split_routes_by_threshold() {
        let tree = DecisionTree::from_nodes(vec![
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2,
            },
            Node::Leaf { prob: 0.2 },
            Node::Leaf { prob: 0.9 },
        ]);
        assert_eq!(tree.predict(&[0.4]), 0.2);
        assert_eq!(tree.predict(&[0.5]), 0.9); // boundary goes right
        assert_eq!(tree.predict(&[0.6]), 0.9);
    }
}
