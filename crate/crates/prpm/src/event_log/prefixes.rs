//! Prefix extraction with a length ceiling.
//!
//! Every completed trace of length n yields prefixes of length 1..=min(n, L*),
//! where L* is the nearest-rank percentile of training trace lengths. Capping
//! at L* keeps bucket sizes workable and drops only the rare ultra-long tails.

use super::{FeatureSchema, PrefixGroup, PrefixInstance, Trace};

/// Nearest-rank quantile: smallest element with at least `p·n` values at or
/// below it, i.e. `sorted[ceil(p·n) - 1]`.
pub fn length_ceiling(traces: &[Trace], max_percentile: f64) -> usize {
    assert!(
        (0.0..=1.0).contains(&max_percentile) && max_percentile > 0.0,
        "max_percentile must lie in (0, 1], got {max_percentile}"
    );
    let mut lengths: Vec<usize> = traces.iter().map(Trace::len).collect();
    if lengths.is_empty() {
        return 0;
    }
    lengths.sort_unstable();
    let rank = (max_percentile * lengths.len() as f64).ceil() as usize;
    lengths[rank.max(1) - 1]
}

/// Expand traces into per-length prefix instance groups.
///
/// Group `k` (1-based) holds one instance per trace with at least `k` events,
/// encoded over its first `k` events and labeled with the full-trace outcome.
/// Traces without an outcome are skipped. Groups come back ordered by length,
/// instances within a group in input trace order.
pub fn extract_prefixes(
    traces: &[Trace],
    max_percentile: f64,
    schema: &FeatureSchema,
) -> Vec<PrefixGroup> {
    let ceiling = length_ceiling(traces, max_percentile);
    let mut groups: Vec<PrefixGroup> = (1..=ceiling)
        .map(|prefix_len| PrefixGroup {
            prefix_len,
            instances: Vec::new(),
        })
        .collect();
    for trace in traces {
        let Some(label) = trace.outcome else { continue };
        let upto = trace.len().min(ceiling);
        for k in 1..=upto {
            let events = &trace.events[..k];
            groups[k - 1].instances.push(PrefixInstance {
                case_id: trace.case_id.clone(),
                prefix_len: k,
                features: schema.encode(events),
                label,
                treated: trace.treated,
                as_of: events[k - 1].timestamp,
            });
        }
    }
    groups
}
