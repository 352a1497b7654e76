//! Bagged tree ensembles with entropy-decomposed uncertainty.
//!
//! An ensemble of `m` independently seeded trees predicts the probability of
//! a negative case outcome. The spread of member predictions is summarized by
//! three base-2 entropies:
//!
//! * total — entropy of the averaged prediction;
//! * aleatoric — average entropy of the individual predictions, the
//!   irreducible data noise;
//! * epistemic — their difference, the model disagreement that shrinks with
//!   more or better training data.
//!
//! `total = aleatoric + epistemic` holds by construction, and epistemic is
//! non-negative because entropy is concave.

mod tree;

pub use tree::{DecisionTree, Node, TreeParams};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Default ensemble size; larger values tighten the epistemic estimate.
pub const DEFAULT_MEMBERS: usize = 10;

/// Binary Shannon entropy in bits, with the `0·log2(0) := 0` convention; the
/// input itself is never clamped, so degenerate probabilities give exactly 0.
pub fn entropy(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p), "probability out of range: {p}");
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Arithmetic mean of member probabilities.
pub fn avg_pred(member_probs: &[f64]) -> f64 {
    assert!(!member_probs.is_empty(), "no member predictions");
    member_probs.iter().sum::<f64>() / member_probs.len() as f64
}

/// The averaged prediction and its uncertainty decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    /// Ensemble-mean probability of a negative outcome.
    pub avg_pred: f64,
    /// Entropy of `avg_pred`; in [0, 1] for a binary outcome.
    pub total: f64,
    /// Mean entropy of the member predictions.
    pub aleatoric: f64,
    /// `total - aleatoric`; zeroed when within 1e-12 of 0.
    pub epistemic: f64,
}

/// Split member predictions into the three uncertainty components.
pub fn decompose(member_probs: &[f64]) -> UncertaintyReport {
    let avg = avg_pred(member_probs);
    let total = entropy(avg);
    let aleatoric =
        member_probs.iter().map(|&p| entropy(p)).sum::<f64>() / member_probs.len() as f64;
    let mut epistemic = total - aleatoric;
    if epistemic.abs() < 1e-12 {
        epistemic = 0.0;
    }
    UncertaintyReport {
        avg_pred: avg,
        total,
        aleatoric,
        epistemic,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberModel {
    pub seed: u64,
    tree: DecisionTree,
}

/// A fixed-size bag of trees sharing one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    n_features: usize,
    params: TreeParams,
    members: Vec<MemberModel>,
}

impl Ensemble {
    /// Train `m >= 2` members, each on its own bootstrap resample of
    /// `ceil(row_subsample · n)` rows drawn with a seed derived from
    /// `(master_seed, member_index)`. Labels are `true` for the negative
    /// outcome. Both classes must be present.
    pub fn train(
        features: &[Vec<f64>],
        labels: &[bool],
        m: usize,
        params: &TreeParams,
        master_seed: u64,
    ) -> Result<Ensemble> {
        if m < 2 {
            return Err(Error::EnsembleTooSmall(m));
        }
        assert_eq!(features.len(), labels.len());
        let has_pos = labels.iter().any(|&y| y);
        let has_neg = labels.iter().any(|&y| !y);
        if !(has_pos && has_neg) {
            return Err(Error::SingleClass);
        }
        let n = labels.len();
        let boot_size = ((params.row_subsample * n as f64).ceil() as usize).max(1);
        let members = (0..m)
            .map(|i| {
                let seed = derive_seed(master_seed, i as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut boot_features = Vec::with_capacity(boot_size);
                let mut boot_labels = Vec::with_capacity(boot_size);
                for _ in 0..boot_size {
                    let j = rng.random_range(0..n);
                    boot_features.push(features[j].clone());
                    boot_labels.push(labels[j]);
                }
                let tree = DecisionTree::fit(&boot_features, &boot_labels, params, &mut rng);
                MemberModel { seed, tree }
            })
            .collect();
        Ok(Ensemble {
            n_features: features[0].len(),
            params: *params,
            members,
        })
    }

    /// Assemble an ensemble from pre-built trees (for toy setups and tests).
    pub fn from_members(n_features: usize, trees: Vec<DecisionTree>) -> Ensemble {
        assert!(trees.len() >= 2, "an ensemble needs at least two members");
        Ensemble {
            n_features,
            params: TreeParams::default(),
            members: trees
                .into_iter()
                .enumerate()
                .map(|(i, tree)| MemberModel { seed: i as u64, tree })
                .collect(),
        }
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    /// Score one feature vector: per-member probabilities plus decomposition.
    pub fn score(&self, features: &[f64]) -> Result<(Vec<f64>, UncertaintyReport)> {
        if features.len() != self.n_features {
            return Err(Error::SchemaMismatch {
                expected: self.n_features,
                got: features.len(),
            });
        }
        let probs: Vec<f64> = self.members.iter().map(|m| m.tree.predict(features)).collect();
        let report = decompose(&probs);
        Ok((probs, report))
    }

    /// Ensemble-mean probability of a negative outcome.
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        Ok(self.score(features)?.1.avg_pred)
    }
}
