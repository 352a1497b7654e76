//! Synthetic event-log generator with planted, recoverable signal.
//!
//! Each case draws a latent risk that drives both its event amounts and its
//! negative-outcome probability, so outcome models have something real to
//! learn from prefixes. Treatment is a second offer event; under treatment
//! the outcome flips from negative to positive with probability `uplift`,
//! independent of features (the same uniform draw decides both arms, so the
//! flip probability is exact, not approximate).
//!
//! Two texture knobs shape harder experiments:
//!
//! * `uplift_slope` tilts the per-case effect with risk (0 keeps the effect
//!   exactly constant);
//! * `ood_fraction` mixes in cases with far-out-of-range amounts and
//!   coin-flip outcomes, inflating epistemic uncertainty where the training
//!   data says nothing.
//!
//! Amounts escalate or cool along the trace (per-case archetype), so
//! prefix-level predictions genuinely move as events arrive.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, TimeDelta, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::event_log::{AttrValue, Event, OutcomeLabel, Trace};
use crate::seed::derive_seed;

pub const OFFER_ACTIVITY: &str = "O_Create Offer";
pub const POSITIVE_TERMINAL: &str = "A_Pending";
pub const NEGATIVE_TERMINALS: [&str; 2] = ["A_Cancelled", "A_Denied"];

/// Generator parameters. The defaults produce the bundled evaluation log:
/// 2,000 cases with heterogeneous effects and 20% out-of-distribution noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub cases: usize,
    /// Size of the non-offer, non-terminal activity alphabet.
    pub middle_activities: usize,
    /// Floor of the negative-outcome probability for risk 0.
    pub base_rate: f64,
    /// Probability that treatment flips a negative outcome to positive.
    pub uplift: f64,
    /// Risk-tilt of the effect: per-case uplift becomes
    /// `uplift + uplift_slope · (risk − ½)`. Zero keeps it constant.
    pub uplift_slope: f64,
    /// Probability a case receives the second offer (the treatment).
    pub treated_fraction: f64,
    /// Fraction of cases with scattered far-out amounts and coin-flip
    /// outcomes.
    pub ood_fraction: f64,
    /// Negative-outcome probability of out-of-distribution cases.
    pub ood_negative_rate: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Mean gap between case arrivals; controls resource contention.
    pub inter_arrival_seconds: f64,
    /// Mean gap between consecutive events of one case.
    pub event_gap_seconds: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            cases: 2_000,
            middle_activities: 6,
            base_rate: 0.35,
            uplift: 0.3,
            uplift_slope: 0.35,
            treated_fraction: 0.5,
            ood_fraction: 0.2,
            ood_negative_rate: 0.55,
            min_len: 5,
            max_len: 10,
            inter_arrival_seconds: 30.0,
            event_gap_seconds: 60.0,
        }
    }
}

impl SynthSpec {
    /// Constant-effect variant: exactly the "outcome flips with probability
    /// `uplift`, independent of features" contract, with no noise cases.
    pub fn constant_effect(cases: usize, uplift: f64) -> SynthSpec {
        SynthSpec {
            cases,
            uplift,
            uplift_slope: 0.0,
            ood_fraction: 0.0,
            ..SynthSpec::default()
        }
    }

    /// Spec knobs as stable key-value pairs for run manifests.
    pub fn to_key_values(&self) -> std::collections::BTreeMap<String, String> {
        let mut kv = std::collections::BTreeMap::new();
        let mut put = |k: &str, v: String| {
            kv.insert(k.to_string(), v);
        };
        put("cases", self.cases.to_string());
        put("middle_activities", self.middle_activities.to_string());
        put("base_rate", self.base_rate.to_string());
        put("uplift", self.uplift.to_string());
        put("uplift_slope", self.uplift_slope.to_string());
        put("treated_fraction", self.treated_fraction.to_string());
        put("ood_fraction", self.ood_fraction.to_string());
        put("ood_negative_rate", self.ood_negative_rate.to_string());
        put("min_len", self.min_len.to_string());
        put("max_len", self.max_len.to_string());
        put(
            "inter_arrival_seconds",
            self.inter_arrival_seconds.to_string(),
        );
        put("event_gap_seconds", self.event_gap_seconds.to_string());
        kv
    }
}

fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

fn shape(escalating: bool, t: usize) -> f64 {
    if escalating {
        1.0 + 0.12 * t as f64
    } else {
        (1.0 - 0.09 * t as f64).max(0.25)
    }
}

/// Deterministically generate the log: equal `(spec, seed)` gives an
/// identical trace list.
pub fn generate_synthetic_log(spec: &SynthSpec, seed: u64) -> Vec<Trace> {
    assert!(spec.min_len >= 4, "traces need room for offers and a terminal");
    assert!(spec.max_len >= spec.min_len);
    let lo = spec.base_rate.max(spec.uplift + 0.05);
    let hi = 0.95;
    (0..spec.cases)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let case_id = format!("case_{i:05}");

            let risk: f64 = rng.random();
            let treated = rng.random_bool(spec.treated_fraction);
            let escalating = rng.random_bool(0.5);
            let target_len = rng.random_range(spec.min_len..=spec.max_len);
            let ood = spec.ood_fraction > 0.0 && rng.random_bool(spec.ood_fraction);

            let offers = if treated { 2 } else { 1 };
            let middles = target_len.saturating_sub(1 + offers).max(1);
            let mut activities: Vec<String> = (0..middles)
                .map(|_| format!("Act_{}", rng.random_range(0..spec.middle_activities)))
                .collect();
            activities.insert(1.min(activities.len()), OFFER_ACTIVITY.to_string());
            if treated {
                let at = 3.min(activities.len());
                activities.insert(at, OFFER_ACTIVITY.to_string());
            }

            let base_amount = 200.0 + 1_800.0 * risk;
            let amounts: Vec<f64> = (0..activities.len())
                .map(|t| {
                    if ood {
                        20_000.0 + rng.random::<f64>() * 20_000.0
                    } else {
                        base_amount * shape(escalating, t) + (rng.random::<f64>() - 0.5) * 40.0
                    }
                })
                .collect();

            let final_amount = *amounts.last().unwrap();
            let risk_eff = ((final_amount - 200.0) / 3_600.0).clamp(0.0, 1.0);
            let p_neg = if ood {
                spec.ood_negative_rate
            } else {
                lo + (hi - lo) * risk_eff
            };
            let case_uplift = if ood {
                0.0
            } else {
                (spec.uplift + spec.uplift_slope * (risk_eff - 0.5))
                    .clamp(0.0, 1.0)
                    .min(p_neg - 0.02)
                    .max(0.0)
            };
            let u: f64 = rng.random();
            let negative = if treated { u < p_neg - case_uplift } else { u < p_neg };

            let terminal = if negative {
                NEGATIVE_TERMINALS[usize::from(rng.random_bool(0.5))]
            } else {
                POSITIVE_TERMINAL
            };

            let arrival_offset =
                i as f64 * spec.inter_arrival_seconds + rng.random::<f64>() * spec.inter_arrival_seconds;
            let mut t = base_time() + millis(arrival_offset);
            let mut events = Vec::with_capacity(activities.len() + 1);
            for (step, activity) in activities.iter().enumerate() {
                let mut attributes = std::collections::BTreeMap::new();
                attributes.insert("amount".to_string(), AttrValue::Numeric(amounts[step]));
                events.push(Event {
                    case_id: case_id.clone(),
                    activity: activity.clone(),
                    timestamp: t,
                    attributes,
                });
                t += millis(spec.event_gap_seconds * (0.75 + 0.5 * rng.random::<f64>()));
            }
            events.push(Event {
                case_id: case_id.clone(),
                activity: terminal.to_string(),
                timestamp: t,
                attributes: std::collections::BTreeMap::new(),
            });

            Trace {
                case_id,
                events,
                outcome: Some(if negative {
                    OutcomeLabel::Negative
                } else {
                    OutcomeLabel::Positive
                }),
                treated,
            }
        })
        .collect()
}

fn millis(seconds: f64) -> TimeDelta {
    TimeDelta::milliseconds((seconds * 1_000.0).round() as i64)
}

/// Write traces as a raw event-log CSV readable by the default column
/// mapping (`case_id`, `activity`, `timestamp`, plus an `amount` column).
pub fn write_event_log_csv(traces: &[Trace], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["case_id", "activity", "timestamp", "amount"])?;
    for trace in traces {
        for event in &trace.events {
            let amount = match event.attributes.get("amount") {
                Some(AttrValue::Numeric(v)) => v.to_string(),
                _ => String::new(),
            };
            w.write_record([
                event.case_id.as_str(),
                event.activity.as_str(),
                &event.timestamp.format("%Y-%m-%d %H:%M:%S%.3f").to_string(),
                &amount,
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `write_event_log_csv` to a file path.
pub fn write_event_log_file(traces: &[Trace], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| crate::error::Error::io(path, e))?;
    write_event_log_csv(traces, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use crate::event_log::TreatmentRule;

    use super::*;

    fn small_spec() -> SynthSpec {
        SynthSpec {
            cases: 300,
            ..SynthSpec::constant_effect(300, 0.3)
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = small_spec();
        assert_eq!(
            generate_synthetic_log(&spec, 7),
            generate_synthetic_log(&spec, 7)
        );
    }

    #[test]
    fn different_seeds_differ() {
        let spec = small_spec();
        assert_ne!(
            generate_synthetic_log(&spec, 7),
            generate_synthetic_log(&spec, 8)
        );
    }

    #[test]
    fn zero_cases_give_an_empty_log() {
        let spec = SynthSpec {
            cases: 0,
            ..SynthSpec::default()
        };
        assert!(generate_synthetic_log(&spec, 1).is_empty());
    }

    #[test]
    fn trace_lengths_fit_the_window() {
        let spec = small_spec();
        for trace in generate_synthetic_log(&spec, 3) {
            assert!((spec.min_len..=spec.max_len).contains(&trace.len()));
        }
    }

    #[test]
    fn timestamps_increase_within_each_trace() {
        for trace in generate_synthetic_log(&small_spec(), 11) {
            for pair in trace.events.windows(2) {
                assert!(pair[0].timestamp < pair[1].timestamp);
            }
        }
    }

    #[test]
    fn treated_flag_matches_the_offer_count_rule() {
        let rule = TreatmentRule::OfferCountAtLeast(2);
        for trace in generate_synthetic_log(&small_spec(), 5) {
            let offers = trace
                .events
                .iter()
                .filter(|e| e.activity == OFFER_ACTIVITY)
                .count();
            assert_eq!(trace.treated, rule.applies(offers));
            assert_eq!(offers, if trace.treated { 2 } else { 1 });
        }
    }

    #[test]
    fn terminal_activity_encodes_the_outcome() {
        for trace in generate_synthetic_log(&small_spec(), 9) {
            let last = &trace.events.last().unwrap().activity;
            match trace.outcome.unwrap() {
                OutcomeLabel::Positive => assert_eq!(last, POSITIVE_TERMINAL),
                OutcomeLabel::Negative => {
                    assert!(NEGATIVE_TERMINALS.contains(&last.as_str()))
                }
            }
        }
    }

    fn arm_rates(traces: &[Trace]) -> (f64, f64, usize, usize) {
        let (mut neg_t, mut n_t, mut neg_c, mut n_c) = (0usize, 0usize, 0usize, 0usize);
        for trace in traces {
            let neg = trace.outcome == Some(OutcomeLabel::Negative);
            if trace.treated {
                n_t += 1;
                neg_t += usize::from(neg);
            } else {
                n_c += 1;
                neg_c += usize::from(neg);
            }
        }
        (
            neg_t as f64 / n_t as f64,
            neg_c as f64 / n_c as f64,
            n_t,
            n_c,
        )
    }

    #[test]
    fn zero_uplift_leaves_arm_rates_equal() {
        let spec = SynthSpec::constant_effect(2_000, 0.0);
        let traces = generate_synthetic_log(&spec, 13);
        let (rate_t, rate_c, n_t, n_c) = arm_rates(&traces);
        let pooled = (rate_t * n_t as f64 + rate_c * n_c as f64) / (n_t + n_c) as f64;
        let se = (pooled * (1.0 - pooled) * (1.0 / n_t as f64 + 1.0 / n_c as f64)).sqrt();
        assert!(
            (rate_t - rate_c).abs() <= 3.0 * se,
            "arm gap {} exceeds 3 standard errors {}",
            (rate_t - rate_c).abs(),
            3.0 * se
        );
    }

    #[test]
    fn constant_uplift_separates_arm_rates_by_tau() {
        let spec = SynthSpec::constant_effect(4_000, 0.3);
        let traces = generate_synthetic_log(&spec, 21);
        let (rate_t, rate_c, n_t, n_c) = arm_rates(&traces);
        let se = (rate_c * (1.0 - rate_c) * (1.0 / n_t as f64 + 1.0 / n_c as f64)).sqrt();
        let gap = rate_c - rate_t;
        assert!(
            (gap - 0.3).abs() <= 3.0 * se + 0.02,
            "arm gap {gap} too far from 0.3 (3 SE = {})",
            3.0 * se
        );
    }

    #[test]
    fn ood_cases_have_far_out_amounts() {
        let spec = SynthSpec {
            cases: 500,
            ..SynthSpec::default()
        };
        let traces = generate_synthetic_log(&spec, 2);
        let mut far = 0usize;
        for trace in &traces {
            let any_far = trace.events.iter().any(|e| {
                matches!(e.attributes.get("amount"), Some(AttrValue::Numeric(v)) if *v > 10_000.0)
            });
            far += usize::from(any_far);
        }
        let fraction = far as f64 / traces.len() as f64;
        assert!(
            (0.1..=0.3).contains(&fraction),
            "out-of-range fraction {fraction} not near 0.2"
        );
    }

    #[test]
    fn csv_round_trip_recovers_traces() {
        let spec = SynthSpec {
            cases: 50,
            ..SynthSpec::default()
        };
        let traces = generate_synthetic_log(&spec, 4);
        let mut buf = Vec::new();
        write_event_log_csv(&traces, &mut buf).unwrap();
        let parsed = crate::event_log::parse_log_from_reader(
            buf.as_slice(),
            &crate::event_log::ColumnMapping::default(),
        )
        .unwrap();
        assert!(parsed.issues.is_empty());
        assert_eq!(parsed.traces.len(), traces.len());
        for (orig, back) in traces.iter().zip(&parsed.traces) {
            assert_eq!(orig.case_id, back.case_id);
            assert_eq!(orig.outcome, back.outcome);
            assert_eq!(orig.treated, back.treated);
            assert_eq!(orig.len(), back.len());
            for (a, b) in orig.events.iter().zip(&back.events) {
                assert_eq!(a.activity, b.activity);
                assert_eq!(a.timestamp, b.timestamp);
                assert_eq!(a.attributes.get("amount"), b.attributes.get("amount"));
            }
        }
    }
}
