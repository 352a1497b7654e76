//! One-step-ahead score projection via weighted nearest neighbors.
//!
//! Historical prefixes are scored once at build time and bucketed by length.
//! For a case at prefix `k`, the bucket `k + 1` answers "what did similar
//! cases look like one event later": take the `knn_k` nearest neighbors in
//! min-max-scaled Euclidean distance and average their score triples with
//! weight `frequency / (1 + distance)`. An empty bucket projects the present
//! forward unchanged, which makes the opportunity cost of waiting zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::causal::UpliftModel;
use crate::ensemble::Ensemble;
use crate::error::Result;
use crate::event_log::PrefixGroup;

/// The three per-prefix scores every decision consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple {
    /// Ensemble-mean probability of a negative outcome.
    pub avg_pred: f64,
    /// Entropy of `avg_pred`, in [0, 1].
    pub total_uncer: f64,
    /// Estimated reduction in negative-outcome probability if treated.
    pub cate: f64,
}

/// Per-feature min-max ranges fitted on training vectors; constant features
/// scale to 0 so they never contribute distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit<'a>(vectors: impl IntoIterator<Item = &'a [f64]>) -> MinMaxScaler {
        let mut iter = vectors.into_iter();
        let first = iter.next().expect("cannot fit a scaler on zero vectors");
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for v in iter {
            for (i, &x) in v.iter().enumerate() {
                min[i] = min[i].min(x);
                max[i] = max[i].max(x);
            }
        }
        MinMaxScaler { min, max }
    }

    /// Identity scaler: distances run on raw coordinates.
    pub fn identity(n_features: usize) -> MinMaxScaler {
        MinMaxScaler {
            min: vec![0.0; n_features],
            max: vec![1.0; n_features],
        }
    }

    fn scaled(&self, i: usize, x: f64) -> f64 {
        let span = self.max[i] - self.min[i];
        if span > 0.0 {
            (x - self.min[i]) / span
        } else {
            0.0
        }
    }

    /// Euclidean distance between two vectors in scaled space.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (&x, &y))| {
                let d = self.scaled(i, x) - self.scaled(i, y);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// A deduplicated historical prefix: raw features, its scores, and how many
/// identical vectors collapsed into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub features: Vec<f64>,
    pub scores: ScoreTriple,
    pub frequency: u32,
}

/// Scored training prefixes bucketed by prefix length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryIndex {
    buckets: BTreeMap<usize, Vec<IndexEntry>>,
    scaler: MinMaxScaler,
}

/// Bit pattern of a feature vector; exact-duplicate detection must not merge
/// values that differ below any epsilon.
fn bit_key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

impl HistoryIndex {
    /// Score every training prefix with both models and bucket by length.
    /// Exact-duplicate vectors within a bucket merge with summed frequency.
    pub fn build(
        groups: &[PrefixGroup],
        ensemble: &Ensemble,
        uplift: &UpliftModel,
    ) -> Result<HistoryIndex> {
        let mut buckets: BTreeMap<usize, Vec<IndexEntry>> = BTreeMap::new();
        let mut all_vectors: Vec<&[f64]> = Vec::new();
        for group in groups {
            let mut dedup: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
            let entries = buckets.entry(group.prefix_len).or_default();
            for inst in &group.instances {
                all_vectors.push(&inst.features);
                if let Some(&i) = dedup.get(&bit_key(&inst.features)) {
                    entries[i].frequency += 1;
                    continue;
                }
                let (_, report) = ensemble.score(&inst.features)?;
                let scores = ScoreTriple {
                    avg_pred: report.avg_pred,
                    total_uncer: report.total,
                    cate: uplift.cate(&inst.features)?,
                };
                dedup.insert(bit_key(&inst.features), entries.len());
                entries.push(IndexEntry {
                    features: inst.features.clone(),
                    scores,
                    frequency: 1,
                });
            }
        }
        let scaler = if all_vectors.is_empty() {
            MinMaxScaler::identity(0)
        } else {
            MinMaxScaler::fit(all_vectors)
        };
        Ok(HistoryIndex { buckets, scaler })
    }

    /// Assemble an index from pre-scored entries with an identity scaler
    /// (for worked examples and tests with hand-picked distances).
    pub fn from_entries(
        buckets: BTreeMap<usize, Vec<IndexEntry>>,
        n_features: usize,
    ) -> HistoryIndex {
        HistoryIndex {
            buckets,
            scaler: MinMaxScaler::identity(n_features),
        }
    }

    pub fn bucket(&self, prefix_len: usize) -> &[IndexEntry] {
        self.buckets
            .get(&prefix_len)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Number of distinct prefix lengths with at least one entry.
    pub fn bucket_count(&self) -> usize {
        self.buckets.values().filter(|b| !b.is_empty()).count()
    }

    /// Total deduplicated entries across all buckets.
    pub fn entry_count(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn scaler(&self) -> &MinMaxScaler {
        &self.scaler
    }

    /// Project the scores a case at prefix `k` will have at `k + 1`.
    ///
    /// Looks up bucket `k + 1`, keeps the `knn_k` nearest entries (ties
    /// broken toward earlier entries via stable sort), and averages their
    /// triples with weight `frequency / (1 + distance)`. An empty bucket
    /// returns `current` unchanged.
    pub fn future_scores(
        &self,
        current_features: &[f64],
        current: &ScoreTriple,
        k: usize,
        knn_k: usize,
    ) -> ScoreTriple {
        assert!(knn_k >= 1, "knn_k must be at least 1");
        let bucket = self.bucket(k + 1);
        if bucket.is_empty() {
            return *current;
        }
        let mut ranked: Vec<(f64, &IndexEntry)> = bucket
            .iter()
            .map(|e| (self.scaler.distance(current_features, &e.features), e))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        ranked.truncate(knn_k);
        if let [(_, only)] = ranked.as_slice() {
            return only.scores;
        }

        let mut weight_sum = 0.0;
        let mut avg_pred = 0.0;
        let mut total_uncer = 0.0;
        let mut cate = 0.0;
        for (d, entry) in ranked {
            let w = f64::from(entry.frequency) / (1.0 + d);
            weight_sum += w;
            avg_pred += w * entry.scores.avg_pred;
            total_uncer += w * entry.scores.total_uncer;
            cate += w * entry.scores.cate;
        }
        ScoreTriple {
            avg_pred: avg_pred / weight_sum,
            total_uncer: total_uncer / weight_sum,
            cate: cate / weight_sum,
        }
    }
}
