//! CSV log parsing: rows → time-ordered traces with derived labels.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};

use crate::error::{Error, Result};

use super::{AttrValue, Event, OutcomeLabel, Trace};

/// Which CSV columns carry the mandatory fields, plus the rules that derive
/// case-level labels from raw events. Every other column becomes an event
/// attribute (numeric when it parses as a float, categorical otherwise).
#[derive(Debug, Clone)]
pub struct ColumnMapping {
    pub case_col: String,
    pub activity_col: String,
    pub timestamp_col: String,
    /// chrono format string, e.g. `%Y-%m-%d %H:%M:%S%.f`.
    pub timestamp_format: String,
    pub outcome_rule: OutcomeRule,
    pub treatment_rule: TreatmentRule,
    /// Activity whose occurrences are counted by the treatment rule and the
    /// `offer_count` engineered feature.
    pub offer_activity: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            case_col: "case_id".to_string(),
            activity_col: "activity".to_string(),
            timestamp_col: "timestamp".to_string(),
            timestamp_format: "%Y-%m-%d %H:%M:%S%.f".to_string(),
            outcome_rule: OutcomeRule::default(),
            treatment_rule: TreatmentRule::OfferCountAtLeast(2),
            offer_activity: "O_Create Offer".to_string(),
        }
    }
}

/// Terminal-activity outcome rule: the last event whose activity appears in
/// either set decides the label. Traces with no such event stay unlabeled
/// (incomplete) and are removed by [`super::clean`].
#[derive(Debug, Clone)]
pub struct OutcomeRule {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl Default for OutcomeRule {
    fn default() -> Self {
        // Loan-origination convention: pending = positive, cancelled/denied = negative.
        OutcomeRule {
            positive: vec!["A_Pending".to_string()],
            negative: vec!["A_Cancelled".to_string(), "A_Denied".to_string()],
        }
    }
}

impl OutcomeRule {
    pub fn label_for(&self, events: &[Event]) -> Option<OutcomeLabel> {
        events.iter().rev().find_map(|e| {
            if self.positive.iter().any(|a| *a == e.activity) {
                Some(OutcomeLabel::Positive)
            } else if self.negative.iter().any(|a| *a == e.activity) {
                Some(OutcomeLabel::Negative)
            } else {
                None
            }
        })
    }
}

/// Case-level treatment flag derived from the offer-activity count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreatmentRule {
    OfferCountAtLeast(usize),
    OfferCountEquals(usize),
}

impl TreatmentRule {
    /// Parse a rule like `offer_count>=2` or `offer_count==2`.
    pub fn parse(s: &str) -> Result<TreatmentRule> {
        let s = s.trim();
        let (op, rest) = if let Some(rest) = s.strip_prefix("offer_count>=") {
            (">=", rest)
        } else if let Some(rest) = s.strip_prefix("offer_count==") {
            ("==", rest)
        } else {
            return Err(Error::Config(format!(
                "unrecognized treatment rule '{s}' (expected offer_count>=N or offer_count==N)"
            )));
        };
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("treatment rule count '{rest}' is not a number")))?;
        Ok(match op {
            ">=" => TreatmentRule::OfferCountAtLeast(n),
            _ => TreatmentRule::OfferCountEquals(n),
        })
    }

    pub fn applies(&self, offer_count: usize) -> bool {
        match *self {
            TreatmentRule::OfferCountAtLeast(n) => offer_count >= n,
            TreatmentRule::OfferCountEquals(n) => offer_count == n,
        }
    }
}

impl std::fmt::Display for TreatmentRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            TreatmentRule::OfferCountAtLeast(n) => write!(f, "offer_count>={n}"),
            TreatmentRule::OfferCountEquals(n) => write!(f, "offer_count=={n}"),
        }
    }
}

/// A row that could not be parsed. Collected, never fatal.
#[derive(Debug, Clone)]
pub struct RecordIssue {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub message: String,
}

/// Parse result: traces plus any skipped rows.
#[derive(Debug)]
pub struct ParsedLog {
    pub traces: Vec<Trace>,
    pub issues: Vec<RecordIssue>,
}

/// Parse a CSV event log from a file.
///
/// Rows are grouped by case id and sorted by timestamp within each case
/// (stable, so equal timestamps keep file order). Traces come back in order
/// of first appearance in the file. A missing mandatory column is a fatal
/// configuration error; a malformed row is recorded as an issue and skipped.
pub fn parse_log(path: &Path, mapping: &ColumnMapping) -> Result<ParsedLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_log_from_reader(file, mapping)
}

/// Same as [`parse_log`] but over any reader.
pub fn parse_log_from_reader(reader: impl Read, mapping: &ColumnMapping) -> Result<ParsedLog> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();

    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "missing mandatory column '{name}' (found: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let case_idx = col(&mapping.case_col)?;
    let activity_idx = col(&mapping.activity_col)?;
    let timestamp_idx = col(&mapping.timestamp_col)?;

    let attr_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != case_idx && *i != activity_idx && *i != timestamp_idx)
        .map(|(i, h)| (i, h.to_string()))
        .collect();

    let mut issues = Vec::new();
    let mut order: Vec<String> = Vec::new();
    let mut by_case: BTreeMap<String, Vec<Event>> = BTreeMap::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);

        let case_id = record.get(case_idx).unwrap_or("").trim();
        if case_id.is_empty() {
            issues.push(RecordIssue {
                line,
                message: "empty case id".to_string(),
            });
            continue;
        }
        let raw_ts = record.get(timestamp_idx).unwrap_or("");
        let timestamp = match parse_timestamp(raw_ts, &mapping.timestamp_format) {
            Some(ts) => ts,
            None => {
                issues.push(RecordIssue {
                    line,
                    message: format!("unparseable timestamp '{raw_ts}'"),
                });
                continue;
            }
        };

        let mut attributes = BTreeMap::new();
        for (i, name) in &attr_cols {
            let raw = record.get(*i).unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let value = match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => AttrValue::Numeric(v),
                _ => AttrValue::Categorical(raw.to_string()),
            };
            attributes.insert(name.clone(), value);
        }

        let event = Event {
            case_id: case_id.to_string(),
            activity: record.get(activity_idx).unwrap_or("").to_string(),
            timestamp,
            attributes,
        };
        by_case
            .entry(case_id.to_string())
            .or_insert_with(|| {
                order.push(case_id.to_string());
                Vec::new()
            })
            .push(event);
    }

    let traces = order
        .into_iter()
        .map(|case_id| {
            let mut events = by_case.remove(&case_id).expect("case recorded on insert");
            events.sort_by_key(|e| e.timestamp);
            let outcome = mapping.outcome_rule.label_for(&events);
            let offer_count = events
                .iter()
                .filter(|e| e.activity == mapping.offer_activity)
                .count();
            Trace {
                case_id,
                events,
                outcome,
                treated: mapping.treatment_rule.applies(offer_count),
            }
        })
        .collect();

    Ok(ParsedLog { traces, issues })
}

fn parse_timestamp(raw: &str, format: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(raw.trim(), format)
        .ok()
        .map(|naive| naive.and_utc())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mapping() -> ColumnMapping {
        ColumnMapping {
            outcome_rule: OutcomeRule {
                positive: vec!["done_ok".to_string()],
                negative: vec!["done_bad".to_string()],
            },
            offer_activity: "offer".to_string(),
            ..ColumnMapping::default()
        }
    }

    #[test]
    fn single_case_csv_yields_one_trace() {
        let csv = "case_id,activity,timestamp\n\
                   c1,start,2023-01-01 10:00:00\n\
                   c1,offer,2023-01-01 10:01:00\n\
                   c1,done_ok,2023-01-01 10:02:00\n";
        let parsed = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap();
        assert!(parsed.issues.is_empty());
        assert_eq!(parsed.traces.len(), 1);
        let t = &parsed.traces[0];
        assert_eq!(t.len(), 3);
        assert_eq!(t.outcome, Some(OutcomeLabel::Positive));
        assert!(!t.treated);
    }

    #[test]
    fn interleaved_cases_match_sort_and_group_oracle() {
        // Rows of two cases, deliberately out of time order within each case.
        let rows = [
            ("a", "x", "2023-01-01 10:03:00"),
            ("b", "x", "2023-01-01 10:00:30"),
            ("a", "x", "2023-01-01 10:01:00"),
            ("b", "x", "2023-01-01 10:04:00"),
            ("a", "x", "2023-01-01 10:02:00"),
        ];
        let mut csv = String::from("case_id,activity,timestamp\n");
        for (c, a, ts) in rows {
            csv.push_str(&format!("{c},{a},{ts}\n"));
        }
        let parsed = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap();
        assert_eq!(parsed.traces.len(), 2);

        // Oracle: group the same rows by case, then sort timestamps as strings
        // (this format sorts lexicographically in time order).
        for trace in &parsed.traces {
            let mut expected: Vec<&str> = rows
                .iter()
                .filter(|(c, _, _)| *c == trace.case_id)
                .map(|(_, _, ts)| *ts)
                .collect();
            expected.sort_unstable();
            let got: Vec<String> = trace
                .events
                .iter()
                .map(|e| e.timestamp.format("%Y-%m-%d %H:%M:%S").to_string())
                .collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn bad_timestamp_is_a_record_issue_not_fatal() {
        let csv = "case_id,activity,timestamp\n\
                   c1,start,2023-01-01 10:00:00\n\
                   c1,oops,not-a-date\n\
                   c1,done_bad,2023-01-01 10:02:00\n";
        let parsed = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap();
        assert_eq!(parsed.issues.len(), 1);
        assert_eq!(parsed.issues[0].line, 3);
        assert!(parsed.issues[0].message.contains("not-a-date"));
        assert_eq!(parsed.traces[0].len(), 2);
    }

    #[test]
    fn missing_mandatory_column_is_fatal() {
        let csv = "case_id,activity\nc1,start\n";
        let err = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("timestamp"));
    }

    #[test]
    fn timestamp_fraction_is_optional() {
        let csv = "case_id,activity,timestamp\n\
                   c1,start,2023-01-01 10:00:00.250\n\
                   c1,done_ok,2023-01-01 10:00:01\n";
        let parsed = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap();
        assert!(parsed.issues.is_empty(), "issues: {:?}", parsed.issues);
        assert_eq!(
            parsed.traces[0].events[0].timestamp.timestamp_subsec_millis(),
            250
        );
    }

    #[test]
    fn treatment_rule_parses_and_applies() {
        let ge = TreatmentRule::parse("offer_count>=2").unwrap();
        assert_eq!(ge, TreatmentRule::OfferCountAtLeast(2));
        assert!(ge.applies(2) && ge.applies(3) && !ge.applies(1));

        let eq = TreatmentRule::parse("offer_count==2").unwrap();
        assert!(eq.applies(2) && !eq.applies(3));

        assert!(TreatmentRule::parse("offers>2").is_err());
    }

    #[test]
    fn offer_count_drives_treated_flag() {
        let csv = "case_id,activity,timestamp\n\
                   c1,offer,2023-01-01 10:00:00\n\
                   c1,offer,2023-01-01 10:01:00\n\
                   c1,done_bad,2023-01-01 10:02:00\n";
        let parsed = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap();
        assert!(parsed.traces[0].treated);
    }

    #[test]
    fn attribute_typing_is_numeric_when_parseable() {
        let csv = "case_id,activity,timestamp,amount,channel\n\
                   c1,start,2023-01-01 10:00:00,12.5,web\n\
                   c1,done_ok,2023-01-01 10:01:00,,\n";
        let parsed = parse_log_from_reader(csv.as_bytes(), &mapping()).unwrap();
        let attrs = &parsed.traces[0].events[0].attributes;
        assert_eq!(attrs.get("amount"), Some(&AttrValue::Numeric(12.5)));
        assert_eq!(
            attrs.get("channel"),
            Some(&AttrValue::Categorical("web".to_string()))
        );
        // Empty cells are absent, not zero.
        assert!(parsed.traces[0].events[1].attributes.is_empty());
    }
}
