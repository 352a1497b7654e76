//! Cost/gain algebra and treat-or-wait decisions.
//!
//! For a case with current scores `(avg_pred, total_uncer, cate)`:
//!
//! * leaving it alone is expected to cost `avg_pred · c_uout`;
//! * treating it costs `(avg_pred − cate) · c_uout + c_t1`;
//! * the gain of treating now is the difference, `cate · c_uout − c_t1`.
//!
//! Computing the same gain on the projected future scores gives `f_gain`;
//! `opp_cost = f_gain − c_gain` is what waiting one step is worth, and
//! `adj_gain = c_gain − opp_cost` rewards cases whose opportunity is about
//! to evaporate. Treat when `opp_cost < 0`, wait when it is positive.
//!
//! Candidates are filtered on thresholds (risk, effect, uncertainty), then
//! ranked by descending adjusted gain.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::future_state::ScoreTriple;

/// Cost of an untreated negative outcome and of one intervention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub c_uout: f64,
    pub c_t1: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            c_uout: 20.0,
            c_t1: 1.0,
        }
    }
}

impl CostParams {
    /// Intervening must be cheaper than the outcome it prevents, otherwise
    /// no positive gain exists and every policy degenerates to "never".
    pub fn validate(&self) -> Result<()> {
        if !self.c_uout.is_finite() || self.c_uout <= 0.0 {
            return Err(Error::Config(format!(
                "c_uout must be positive, got {}",
                self.c_uout
            )));
        }
        if !self.c_t1.is_finite() || self.c_t1 < 0.0 || self.c_t1 >= self.c_uout {
            return Err(Error::Config(format!(
                "c_t1 must satisfy 0 <= c_t1 < c_uout, got c_t1 = {} with c_uout = {}",
                self.c_t1, self.c_uout
            )));
        }
        Ok(())
    }
}

/// Whether decisions weigh the projected future state or only the present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyMode {
    /// Ignore projections: rank by current gain alone.
    CurrentOnly,
    /// Rank by adjusted gain, trading current against future gain.
    AdjustedGain,
}

/// Sign convention for the uncertainty trend filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaOrientation {
    /// `f_total_uncer − c_total_uncer`: `< 0` keeps cases becoming more
    /// certain over time.
    FutureMinusCurrent,
    /// `c_total_uncer − f_total_uncer`: `< 0` keeps cases becoming less
    /// certain over time.
    CurrentMinusFuture,
}

/// Thresholds and switches defining one intervention policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Keep cases with current avg_pred strictly above this.
    pub proba_threshold: f64,
    /// Keep cases with current effect estimate strictly above this.
    pub cate_threshold: f64,
    /// If set, keep cases with current total uncertainty strictly below this.
    pub uncer_threshold: Option<f64>,
    /// If set with `use_delta_uncer`, keep cases whose uncertainty trend is
    /// strictly below this.
    pub delta_uncer_threshold: f64,
    pub use_delta_uncer: bool,
    pub delta_orientation: DeltaOrientation,
    pub mode: PolicyMode,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            proba_threshold: 0.5,
            cate_threshold: 0.0,
            uncer_threshold: None,
            delta_uncer_threshold: 0.0,
            use_delta_uncer: false,
            delta_orientation: DeltaOrientation::FutureMinusCurrent,
            mode: PolicyMode::AdjustedGain,
        }
    }
}

/// The four preset policies compared in the evaluation sweep, from plain
/// risk-and-effect gating to the full opportunity-cost treatment.
pub fn preset_policies() -> Vec<NamedPolicy> {
    let base = PolicyConfig::default();
    vec![
        NamedPolicy {
            name: "gain".to_string(),
            config: PolicyConfig {
                mode: PolicyMode::CurrentOnly,
                ..base
            },
        },
        NamedPolicy {
            name: "gain_uncertainty".to_string(),
            config: PolicyConfig {
                mode: PolicyMode::CurrentOnly,
                uncer_threshold: Some(0.75),
                ..base
            },
        },
        NamedPolicy {
            name: "opportunity_cost".to_string(),
            config: base,
        },
        NamedPolicy {
            name: "opportunity_cost_trend".to_string(),
            config: PolicyConfig {
                use_delta_uncer: true,
                delta_uncer_threshold: 0.0,
                ..base
            },
        },
    ]
}

/// A policy with a stable name for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPolicy {
    pub name: String,
    pub config: PolicyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Treat,
    Wait,
    Neutral,
}

/// Every intermediate of the gain algebra for one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainBreakdown {
    pub cost_untreated: f64,
    pub cost_treated: f64,
    pub c_gain: f64,
    pub f_gain: f64,
    pub opp_cost: f64,
    pub adj_gain: f64,
    pub decision: Decision,
}

/// Expected cost of leaving the case untreated.
pub fn cost_untreated(avg_pred: f64, params: &CostParams) -> f64 {
    avg_pred * params.c_uout
}

/// Expected cost of treating now, taking the effect estimate at face value.
pub fn cost_treated(avg_pred: f64, cate: f64, params: &CostParams) -> f64 {
    (avg_pred - cate) * params.c_uout + params.c_t1
}

/// Expected saving from treating now: `cost_untreated − cost_treated`,
/// computed in the cancelled form `cate · c_uout − c_t1` — the probability
/// drops out, and the direct form keeps table-exact values exact instead of
/// round-tripping through `avg_pred − cate`.
pub fn gain(_avg_pred: f64, cate: f64, params: &CostParams) -> f64 {
    cate * params.c_uout - params.c_t1
}

/// Full gain algebra over the current and projected future score triples.
pub fn breakdown(current: &ScoreTriple, future: &ScoreTriple, params: &CostParams) -> GainBreakdown {
    let c_gain = gain(current.avg_pred, current.cate, params);
    let f_gain = gain(future.avg_pred, future.cate, params);
    let opp_cost = f_gain - c_gain;
    let adj_gain = c_gain - opp_cost;
    let decision = if opp_cost < 0.0 {
        Decision::Treat
    } else if opp_cost > 0.0 {
        Decision::Wait
    } else {
        Decision::Neutral
    };
    GainBreakdown {
        cost_untreated: cost_untreated(current.avg_pred, params),
        cost_treated: cost_treated(current.avg_pred, current.cate, params),
        c_gain,
        f_gain,
        opp_cost,
        adj_gain,
        decision,
    }
}

/// An ongoing case up for a decision at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub case_id: String,
    /// First-event timestamp; earlier arrivals win ranking ties.
    pub arrival: DateTime<Utc>,
    pub current: ScoreTriple,
    pub future: ScoreTriple,
}

impl Candidate {
    /// The future triple this candidate's policy mode actually weighs:
    /// `CurrentOnly` collapses future to present, which zeroes `opp_cost`
    /// and reduces `adj_gain` to the plain current gain.
    fn effective_future(&self, config: &PolicyConfig) -> &ScoreTriple {
        match config.mode {
            PolicyMode::CurrentOnly => &self.current,
            PolicyMode::AdjustedGain => &self.future,
        }
    }
}

/// Keep candidates passing every enabled threshold: risky enough, positive
/// estimated effect, and (optionally) certain enough now or trending toward
/// certainty. All comparisons are strict.
pub fn filter<'a>(candidates: &'a [Candidate], config: &PolicyConfig) -> Vec<&'a Candidate> {
    candidates
        .iter()
        .filter(|c| {
            if c.current.avg_pred <= config.proba_threshold {
                return false;
            }
            if c.current.cate <= config.cate_threshold {
                return false;
            }
            if let Some(threshold) = config.uncer_threshold {
                if c.current.total_uncer >= threshold {
                    return false;
                }
            }
            if config.use_delta_uncer {
                let future = c.effective_future(config);
                let delta = match config.delta_orientation {
                    DeltaOrientation::FutureMinusCurrent => {
                        future.total_uncer - c.current.total_uncer
                    }
                    DeltaOrientation::CurrentMinusFuture => {
                        c.current.total_uncer - future.total_uncer
                    }
                };
                if delta >= config.delta_uncer_threshold {
                    return false;
                }
            }
            true
        })
        .collect()
}

/// Order filtered candidates by descending adjusted gain; ties go to the
/// earlier arrival, then the lexicographically smaller case id.
pub fn rank<'a>(
    filtered: Vec<&'a Candidate>,
    config: &PolicyConfig,
    params: &CostParams,
) -> Vec<(&'a Candidate, GainBreakdown)> {
    let mut scored: Vec<(&Candidate, GainBreakdown)> = filtered
        .into_iter()
        .map(|c| (c, breakdown(&c.current, c.effective_future(config), params)))
        .collect();
    scored.sort_by(|(a, ba), (b, bb)| {
        bb.adj_gain
            .total_cmp(&ba.adj_gain)
            .then_with(|| a.arrival.cmp(&b.arrival))
            .then_with(|| a.case_id.cmp(&b.case_id))
    });
    scored
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;
    use proptest::prelude::*;

    use super::*;

    const DEFAULTS: CostParams = CostParams {
        c_uout: 20.0,
        c_t1: 1.0,
    };

    fn triple(avg_pred: f64, total_uncer: f64, cate: f64) -> ScoreTriple {
        ScoreTriple {
            avg_pred,
            total_uncer,
            cate,
        }
    }

    fn candidate(case_id: &str, arrival_s: i64, current: ScoreTriple, future: ScoreTriple) -> Candidate {
        Candidate {
            case_id: case_id.to_string(),
            arrival: Utc.timestamp_opt(arrival_s, 0).unwrap(),
            current,
            future,
        }
    }

    #[test]
    fn costs_match_hand_computed_values() {
        assert_eq!(cost_untreated(0.0, &DEFAULTS), 0.0);
        assert_eq!(cost_untreated(0.8, &DEFAULTS), 16.0);
        assert_eq!(cost_untreated(1.0, &DEFAULTS), 20.0);
        assert_eq!(cost_treated(0.8, 0.3, &DEFAULTS), 11.0);
        assert_eq!(cost_treated(0.8, 0.0, &DEFAULTS), 17.0);
        assert_eq!(cost_treated(0.8, 0.8, &DEFAULTS), 1.0);
    }

    #[test]
    fn gain_is_effect_scaled_minus_intervention_cost() {
        assert_eq!(gain(0.8, 0.3, &DEFAULTS), 5.0);
        assert_eq!(gain(0.8, 0.0, &DEFAULTS), -1.0);
        // break-even effect: 0.05 * 20 = c_t1
        assert_eq!(gain(0.8, 0.05, &DEFAULTS), 0.0);
    }

    // The published worked example: three cases with current/future gains
    // (A: 7/12, B: 5/1, C: 3/3), reconstructed from effects via
    // cate = (gain + 1) / 20 at avg_pred 0.9.
    fn table_cases() -> [Candidate; 3] {
        let at = |g: f64| triple(0.9, 0.5, (g + 1.0) / 20.0);
        [
            candidate("A", 0, at(7.0), at(12.0)),
            candidate("B", 1, at(5.0), at(1.0)),
            candidate("C", 2, at(3.0), at(3.0)),
        ]
    }

    #[test]
    fn worked_example_row_b_treats() {
        let [_, b, _] = table_cases();
        let out = breakdown(&b.current, &b.future, &DEFAULTS);
        assert_eq!(out.c_gain, 5.0);
        assert_eq!(out.f_gain, 1.0);
        assert_eq!(out.opp_cost, -4.0);
        assert_eq!(out.adj_gain, 9.0);
        assert_eq!(out.decision, Decision::Treat);
    }

    #[test]
    fn worked_example_row_c_is_neutral() {
        let [_, _, c] = table_cases();
        let out = breakdown(&c.current, &c.future, &DEFAULTS);
        assert_eq!(out.c_gain, 3.0);
        assert_eq!(out.f_gain, 3.0);
        assert_eq!(out.opp_cost, 0.0);
        assert_eq!(out.adj_gain, 3.0);
        assert_eq!(out.decision, Decision::Neutral);
    }

    #[test]
    fn worked_example_row_a_waits() {
        // The published table prints adj_gain 3 for this row, which
        // contradicts its own definition adj_gain = c_gain - opp_cost
        // (7 - 5 = 2); rows B and C are consistent with the definition,
        // so we follow the definition. The Wait label is unaffected.
        let [a, _, _] = table_cases();
        let out = breakdown(&a.current, &a.future, &DEFAULTS);
        assert_eq!(out.c_gain, 7.0);
        assert_eq!(out.f_gain, 12.0);
        assert_eq!(out.opp_cost, 5.0);
        assert_eq!(out.adj_gain, 2.0);
        assert_eq!(out.decision, Decision::Wait);
    }

    #[test]
    fn ranking_orders_the_worked_example_b_c_a() {
        let cases = table_cases();
        let config = PolicyConfig::default();
        let ranked = rank(filter(&cases, &config), &config, &DEFAULTS);
        let order: Vec<&str> = ranked.iter().map(|(c, _)| c.case_id.as_str()).collect();
        assert_eq!(order, ["B", "C", "A"]);
    }

    #[test]
    fn filter_drops_low_risk_and_nonpositive_effect() {
        let cases = [
            candidate("low_risk", 0, triple(0.4, 0.1, 0.5), triple(0.4, 0.1, 0.5)),
            candidate("zero_effect", 1, triple(0.8, 0.1, 0.0), triple(0.8, 0.1, 0.0)),
            candidate("keeper", 2, triple(0.8, 0.6, 0.3), triple(0.8, 0.6, 0.3)),
        ];
        let kept = filter(&cases, &PolicyConfig::default());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].case_id, "keeper");
    }

    #[test]
    fn uncertainty_gate_admits_below_threshold_only() {
        let config = PolicyConfig {
            uncer_threshold: Some(0.75),
            ..PolicyConfig::default()
        };
        let cases = [
            candidate("calm", 0, triple(0.8, 0.6, 0.3), triple(0.8, 0.6, 0.3)),
            candidate("noisy", 1, triple(0.8, 0.9, 0.3), triple(0.8, 0.9, 0.3)),
        ];
        let kept = filter(&cases, &config);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].case_id, "calm");
    }

    #[test]
    fn lowering_the_uncertainty_gate_never_admits_more() {
        let cases = [
            candidate("a", 0, triple(0.8, 0.2, 0.3), triple(0.8, 0.2, 0.3)),
            candidate("b", 1, triple(0.8, 0.45, 0.3), triple(0.8, 0.45, 0.3)),
            candidate("c", 2, triple(0.8, 0.7, 0.3), triple(0.8, 0.7, 0.3)),
        ];
        let mut previous = usize::MAX;
        for threshold in [0.75, 0.5, 0.25] {
            let config = PolicyConfig {
                uncer_threshold: Some(threshold),
                ..PolicyConfig::default()
            };
            let kept = filter(&cases, &config).len();
            assert!(kept <= previous);
            previous = kept;
        }
    }

    #[test]
    fn uncertainty_trend_gate_follows_orientation() {
        let improving = candidate("improving", 0, triple(0.8, 0.9, 0.3), triple(0.8, 0.4, 0.3));
        let worsening = candidate("worsening", 1, triple(0.8, 0.4, 0.3), triple(0.8, 0.9, 0.3));
        let cases = [improving, worsening];
        let config = PolicyConfig {
            use_delta_uncer: true,
            delta_uncer_threshold: 0.0,
            ..PolicyConfig::default()
        };
        let kept = filter(&cases, &config);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].case_id, "improving");

        let flipped = PolicyConfig {
            delta_orientation: DeltaOrientation::CurrentMinusFuture,
            ..config
        };
        let kept = filter(&cases, &flipped);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].case_id, "worsening");
    }

    #[test]
    fn current_only_mode_ranks_by_plain_gain() {
        // Present-only ranking ignores that A's future gain dwarfs B's.
        let cases = table_cases();
        let config = PolicyConfig {
            mode: PolicyMode::CurrentOnly,
            ..PolicyConfig::default()
        };
        let ranked = rank(filter(&cases, &config), &config, &DEFAULTS);
        let order: Vec<&str> = ranked.iter().map(|(c, _)| c.case_id.as_str()).collect();
        assert_eq!(order, ["A", "B", "C"]);
        for (_, b) in &ranked {
            assert_eq!(b.opp_cost, 0.0);
            assert_eq!(b.adj_gain, b.c_gain);
            assert_eq!(b.decision, Decision::Neutral);
        }
    }

    #[test]
    fn equal_adjusted_gain_breaks_ties_by_arrival_then_id() {
        let t = triple(0.8, 0.5, 0.3);
        let cases = [
            candidate("z_early", 10, t, t),
            candidate("a_late", 20, t, t),
            candidate("b_early", 10, t, t),
        ];
        let config = PolicyConfig::default();
        let ranked = rank(filter(&cases, &config), &config, &DEFAULTS);
        let order: Vec<&str> = ranked.iter().map(|(c, _)| c.case_id.as_str()).collect();
        assert_eq!(order, ["b_early", "z_early", "a_late"]);
    }

    #[test]
    fn cost_params_validate_their_ordering() {
        assert!(CostParams::default().validate().is_ok());
        assert!(CostParams { c_uout: 0.0, c_t1: 0.0 }.validate().is_err());
        assert!(CostParams { c_uout: 5.0, c_t1: 5.0 }.validate().is_err());
        assert!(CostParams { c_uout: 5.0, c_t1: -1.0 }.validate().is_err());
    }

    #[test]
    fn preset_policy_names_are_distinct() {
        let presets = preset_policies();
        assert_eq!(presets.len(), 4);
        let mut names: Vec<&str> = presets.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 4);
    }

    proptest! {
        #[test]
        fn adjusted_gain_identity_holds(
            c_avg in 0.0f64..=1.0, c_cate in -1.0f64..=1.0,
            f_avg in 0.0f64..=1.0, f_cate in -1.0f64..=1.0,
        ) {
            let out = breakdown(
                &triple(c_avg, 0.5, c_cate),
                &triple(f_avg, 0.5, f_cate),
                &DEFAULTS,
            );
            prop_assert!((out.adj_gain - (2.0 * out.c_gain - out.f_gain)).abs() <= 1e-9);
            prop_assert!((out.c_gain - (out.cost_untreated - out.cost_treated)).abs() <= 1e-9);
        }

        #[test]
        fn gain_is_linear_in_effect(
            avg in 0.0f64..=1.0, cate in -1.0f64..=1.0,
        ) {
            let g = gain(avg, cate, &DEFAULTS);
            prop_assert!((g - (cate * DEFAULTS.c_uout - DEFAULTS.c_t1)).abs() <= 1e-9);
        }

        #[test]
        fn every_candidate_gets_exactly_one_decision(
            c_avg in 0.0f64..=1.0, c_cate in -1.0f64..=1.0,
            f_avg in 0.0f64..=1.0, f_cate in -1.0f64..=1.0,
        ) {
            let out = breakdown(
                &triple(c_avg, 0.5, c_cate),
                &triple(f_avg, 0.5, f_cate),
                &DEFAULTS,
            );
            let expected = if out.opp_cost < 0.0 {
                Decision::Treat
            } else if out.opp_cost > 0.0 {
                Decision::Wait
            } else {
                Decision::Neutral
            };
            prop_assert_eq!(out.decision, expected);
        }

        #[test]
        fn rank_permutes_filter_output_and_maximizes_adj_gain(
            seeds in prop::collection::vec((0.0f64..=1.0, -0.2f64..=0.5, 0.0f64..=1.0), 1..20),
        ) {
            let cases: Vec<Candidate> = seeds
                .iter()
                .enumerate()
                .map(|(i, &(avg, cate, f_avg))| candidate(
                    &format!("c{i}"),
                    i as i64,
                    triple(avg, 0.5, cate),
                    triple(f_avg, 0.5, cate),
                ))
                .collect();
            let config = PolicyConfig::default();
            let kept = filter(&cases, &config);
            let kept_ids: Vec<&str> = kept.iter().map(|c| c.case_id.as_str()).collect();
            let ranked = rank(kept.clone(), &config, &DEFAULTS);
            prop_assert_eq!(ranked.len(), kept_ids.len());
            let mut ranked_ids: Vec<&str> = ranked.iter().map(|(c, _)| c.case_id.as_str()).collect();
            ranked_ids.sort_unstable();
            let mut kept_sorted = kept_ids.clone();
            kept_sorted.sort_unstable();
            prop_assert_eq!(ranked_ids, kept_sorted);
            if let Some((_, top)) = ranked.first() {
                for (_, b) in &ranked {
                    prop_assert!(top.adj_gain >= b.adj_gain);
                }
            }
        }
    }
}
