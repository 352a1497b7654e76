//! Aggregate prefix encoding.
//!
//! A prefix is summarized by, in fixed order:
//! 1. per numeric attribute: min, max, mean, sum, last over the events where
//!    the attribute is present (0 when never present);
//! 2. per known activity: its occurrence count, plus one reserved slot
//!    counting activities unseen at schema-inference time;
//! 3. engineered controls: event number, elapsed seconds since the first
//!    event, and the offer-activity count.
//!
//! The schema is inferred once from training traces and frozen; encoding is
//! a pure function of (prefix, schema).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{AttrValue, Event, OutcomeLabel, PrefixGroup};

/// Numeric aggregate kinds, applied in this fixed order per attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregate {
    Min,
    Max,
    Mean,
    Sum,
    Last,
}

pub const AGGREGATES: [Aggregate; 5] = [
    Aggregate::Min,
    Aggregate::Max,
    Aggregate::Mean,
    Aggregate::Sum,
    Aggregate::Last,
];

impl Aggregate {
    fn name(self) -> &'static str {
        match self {
            Aggregate::Min => "min",
            Aggregate::Max => "max",
            Aggregate::Mean => "mean",
            Aggregate::Sum => "sum",
            Aggregate::Last => "last",
        }
    }

    fn apply(self, values: &[f64]) -> f64 {
        if values.is_empty() {
            return 0.0;
        }
        match self {
            Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregate::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregate::Sum => values.iter().sum(),
            Aggregate::Last => *values.last().unwrap(),
        }
    }
}

/// Frozen feature layout shared by every instance of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    /// (attribute, aggregate) pairs, attribute-major in sorted order.
    pub numeric_aggregates: Vec<(String, Aggregate)>,
    /// Known activities in sorted order; one extra "other" slot follows them.
    pub activity_counts: Vec<String>,
    /// Engineered feature names, fixed.
    pub control_features: Vec<String>,
    /// Activity counted by the `offer_count` control feature.
    pub offer_activity: String,
}

impl FeatureSchema {
    /// Infer the schema from training traces: every numeric attribute seen
    /// anywhere gets the full aggregate set, every activity gets a count slot.
    pub fn infer<'a>(traces: impl IntoIterator<Item = &'a super::Trace>, offer_activity: &str) -> FeatureSchema {
        let mut numeric: BTreeSet<String> = BTreeSet::new();
        let mut activities: BTreeSet<String> = BTreeSet::new();
        for trace in traces {
            for event in &trace.events {
                activities.insert(event.activity.clone());
                for (name, value) in &event.attributes {
                    if matches!(value, AttrValue::Numeric(_)) {
                        numeric.insert(name.clone());
                    }
                }
            }
        }
        let numeric_aggregates = numeric
            .into_iter()
            .flat_map(|attr| AGGREGATES.iter().map(move |agg| (attr.clone(), *agg)))
            .collect();
        FeatureSchema {
            numeric_aggregates,
            activity_counts: activities.into_iter().collect(),
            control_features: vec![
                "event_number".to_string(),
                "elapsed_seconds".to_string(),
                "offer_count".to_string(),
            ],
            offer_activity: offer_activity.to_string(),
        }
    }

    /// Total feature vector length (including the reserved "other" slot).
    pub fn len(&self) -> usize {
        self.numeric_aggregates.len() + self.activity_counts.len() + 1 + self.control_features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stable, unique column names for the encoded vector.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for (attr, agg) in &self.numeric_aggregates {
            names.push(format!("num:{attr}:{}", agg.name()));
        }
        for activity in &self.activity_counts {
            names.push(format!("act:{activity}"));
        }
        names.push("act:__other".to_string());
        for ctl in &self.control_features {
            names.push(format!("ctl:{ctl}"));
        }
        names
    }

    /// Encode the first `events.len()` events of a case.
    ///
    /// Unseen categorical activity values land in the reserved "other" count;
    /// absent numeric attributes aggregate over present values only and
    /// default to 0 when never present.
    pub fn encode(&self, events: &[Event]) -> Vec<f64> {
        let mut features = Vec::with_capacity(self.len());

        let mut values_by_attr: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for event in events {
            for (name, value) in &event.attributes {
                if let AttrValue::Numeric(v) = value {
                    values_by_attr.entry(name.as_str()).or_default().push(*v);
                }
            }
        }
        for (attr, agg) in &self.numeric_aggregates {
            let values = values_by_attr
                .get(attr.as_str())
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            features.push(agg.apply(values));
        }

        let mut counts = vec![0u32; self.activity_counts.len()];
        let mut other = 0u32;
        for event in events {
            match self
                .activity_counts
                .binary_search_by(|a| a.as_str().cmp(event.activity.as_str()))
            {
                Ok(i) => counts[i] += 1,
                Err(_) => other += 1,
            }
        }
        features.extend(counts.into_iter().map(f64::from));
        features.push(f64::from(other));

        for ctl in &self.control_features {
            let value = match ctl.as_str() {
                "event_number" => events.len() as f64,
                "elapsed_seconds" => match (events.first(), events.last()) {
                    (Some(first), Some(last)) => {
                        (last.timestamp - first.timestamp).num_milliseconds() as f64 / 1000.0
                    }
                    _ => 0.0,
                },
                "offer_count" => events
                    .iter()
                    .filter(|e| e.activity == self.offer_activity)
                    .count() as f64,
                other => unreachable!("unknown control feature '{other}'"),
            };
            features.push(value);
        }

        debug_assert_eq!(features.len(), self.len());
        features
    }
}

/// Serialize a prefix log as CSV: schema header first, one instance per row.
/// Output is bit-stable across runs (floats in shortest round-trip form).
pub fn write_prefix_log_csv(
    groups: &[PrefixGroup],
    schema: &FeatureSchema,
    writer: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![
        "case_id".to_string(),
        "prefix_len".to_string(),
        "as_of".to_string(),
        "label".to_string(),
        "treated".to_string(),
    ];
    header.extend(schema.feature_names());
    w.write_record(&header)?;
    for group in groups {
        for inst in &group.instances {
            let mut row = vec![
                inst.case_id.clone(),
                inst.prefix_len.to_string(),
                inst.as_of.format("%Y-%m-%d %H:%M:%S%.3f").to_string(),
                match inst.label {
                    OutcomeLabel::Positive => "positive".to_string(),
                    OutcomeLabel::Negative => "negative".to_string(),
                },
                inst.treated.to_string(),
            ];
            row.extend(inst.features.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
