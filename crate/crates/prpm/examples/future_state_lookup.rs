//! Projecting a case's scores one step ahead with the history index.
//!
//! The index buckets every scored training prefix by length. For a case at
//! prefix length k, the projection looks up bucket k+1, keeps the nearest
//! entries in min-max-scaled feature space, and averages their score triples
//! with weight `frequency / (1 + distance)`. No model is re-run at lookup
//! time — the future is read off what similar cases looked like one event
//! later.
//!
//! ```bash
//! cargo run -p prpm --example future_state_lookup
//! ```

use std::collections::BTreeMap;

use prpm::config::Settings;
use prpm::future_state::{HistoryIndex, IndexEntry, ScoreTriple};
use prpm::pipeline::train_pipeline;
use prpm::replay::{generate_synthetic_log, SynthSpec};

fn main() {
    // Hand-sized index first: one bucket of length-5 prefixes, queried from a
    // case at k = 4. Weights are frequency / (1 + distance).
    let bucket = vec![
        IndexEntry {
            features: vec![0.0],
            scores: ScoreTriple { avg_pred: 0.9, total_uncer: 0.1, cate: 0.0 },
            frequency: 1,
        },
        IndexEntry {
            features: vec![1.0],
            scores: ScoreTriple { avg_pred: 0.6, total_uncer: 0.2, cate: 0.0 },
            frequency: 2,
        },
        IndexEntry {
            features: vec![3.0],
            scores: ScoreTriple { avg_pred: 0.3, total_uncer: 0.3, cate: 0.0 },
            frequency: 1,
        },
    ];
    let index = HistoryIndex::from_entries(BTreeMap::from([(5, bucket)]), 1);

    let current = ScoreTriple { avg_pred: 0.42, total_uncer: 0.98, cate: 0.11 };
    let projected = index.future_scores(&[0.0], &current, 4, 3);
    println!("three neighbors at distance 0, 1, 3 with frequency 1, 2, 1:");
    println!("  weights 1.00, 1.00, 0.25  ->  projected avg_pred {}", projected.avg_pred);

    // Bucket 6 is empty, so a case already at the ceiling keeps its scores.
    let held = index.future_scores(&[0.0], &current, 5, 3);
    println!(
        "no bucket one step ahead     ->  scores held at avg_pred {}",
        held.avg_pred
    );
    println!();

    // The same lookup over a trained index: follow one held-out case and
    // print its score trajectory next to the projection made one step before.
    let settings = Settings::default();
    let spec = SynthSpec { cases: 600, ..SynthSpec::default() };
    let traces = generate_synthetic_log(&spec, 31);
    let (bundle, split) = train_pipeline(traces, &settings).unwrap();
    println!(
        "trained index: {} entries across {} prefix lengths",
        bundle.index.entry_count(),
        bundle.index.bucket_count()
    );

    let case = split
        .test
        .iter()
        .find(|t| t.len() >= 6)
        .expect("test split has a long case");
    println!();
    println!("case {} one prefix at a time:", case.case_id);
    println!("  k   avg_pred   cate     projected avg_pred for k+1");
    let mut previous_projection: Option<ScoreTriple> = None;
    for k in 1..=6usize {
        let features = bundle.schema.encode(&case.events[..k]);
        let (_, report) = bundle.ensemble.score(&features).unwrap();
        let current = ScoreTriple {
            avg_pred: report.avg_pred,
            total_uncer: report.total,
            cate: bundle.uplift.cate(&features).unwrap(),
        };
        let next = bundle
            .index
            .future_scores(&features, &current, k, bundle.knn_k);
        let drift = previous_projection
            .map(|p| format!("   (prior projection was {:.3})", p.avg_pred))
            .unwrap_or_default();
        println!(
            "  {k}   {:.3}      {:+.3}   {:.3}{drift}",
            current.avg_pred, current.cate, next.avg_pred
        );
        previous_projection = Some(next);
    }
}
