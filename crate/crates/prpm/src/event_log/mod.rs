//! Event-log ingestion: parse raw logs into traces, clean incomplete cases,
//! extract and encode prefixes, and split the data temporally.
//!
//! The unit of prediction downstream is the [`PrefixInstance`]: the first `k`
//! events of a trace, encoded as a fixed-length numeric vector under a
//! [`FeatureSchema`], labeled with the full trace's outcome and treatment
//! flag.

mod encode;
mod parse;
mod prefixes;
mod split;

pub use encode::{write_prefix_log_csv, Aggregate, FeatureSchema};
pub use parse::{
    parse_log, parse_log_from_reader, ColumnMapping, OutcomeRule, ParsedLog, RecordIssue,
    TreatmentRule,
};
pub use prefixes::{extract_prefixes, length_ceiling};
pub use split::{temporal_split, TemporalSplit};

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// An event attribute value: numeric or categorical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttrValue {
    Numeric(f64),
    Categorical(String),
}

/// One event of a case.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    /// UTC instant, millisecond precision.
    pub timestamp: DateTime<Utc>,
    /// Attribute names are unique by construction of the map.
    pub attributes: BTreeMap<String, AttrValue>,
}

/// Binary case outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeLabel {
    Positive,
    Negative,
}

/// One end-to-end case: its time-ordered events plus case-level labels.
///
/// `outcome` is `None` for incomplete cases (no terminal outcome-defining
/// event was observed); [`clean`] removes those before modeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
    pub outcome: Option<OutcomeLabel>,
    pub treated: bool,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Timestamp of the first event (case arrival).
    pub fn start_time(&self) -> DateTime<Utc> {
        self.events[0].timestamp
    }
}

/// A `k`-length prefix of a trace, encoded and labeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixInstance {
    pub case_id: String,
    pub prefix_len: usize,
    pub features: Vec<f64>,
    pub label: OutcomeLabel,
    pub treated: bool,
    /// Timestamp of the k-th event: nothing later is visible to this instance.
    pub as_of: DateTime<Utc>,
}

/// All prefix instances of one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixGroup {
    pub prefix_len: usize,
    pub instances: Vec<PrefixInstance>,
}

/// Drop traces that never reached a terminal outcome-defining event.
///
/// Returns the surviving traces and the number removed.
pub fn clean(traces: Vec<Trace>) -> (Vec<Trace>, usize) {
    let before = traces.len();
    let kept: Vec<Trace> = traces.into_iter().filter(|t| t.outcome.is_some()).collect();
    let removed = before - kept.len();
    (kept, removed)
}
