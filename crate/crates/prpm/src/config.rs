//! Flat key-value configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. Every key has a
//! built-in default; precedence is CLI flag over config file over default.
//! [`Settings::to_key_values`] emits the full effective configuration in a
//! stable order, which doubles as the manifest's config snapshot.

use std::collections::BTreeMap;
use std::path::Path;

use crate::allocator::DurationDist;
use crate::causal::UpliftParams;
use crate::ensemble::TreeParams;
use crate::error::{Error, Result};
use crate::event_log::{ColumnMapping, OutcomeRule, TreatmentRule};
use crate::policy::{CostParams, DeltaOrientation, PolicyConfig, PolicyMode};

/// Effective configuration for the whole pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    // Event-log parsing.
    pub case_col: String,
    pub activity_col: String,
    pub timestamp_col: String,
    pub timestamp_format: String,
    pub positive_activities: Vec<String>,
    pub negative_activities: Vec<String>,
    pub treatment_rule: TreatmentRule,
    pub offer_activity: String,

    // Temporal split and prefix extraction.
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub max_prefix_percentile: f64,

    // Models.
    pub members: usize,
    pub max_depth: usize,
    pub min_leaf_count: usize,
    pub feature_subsample: f64,
    pub row_subsample: f64,
    pub min_arm_size: usize,
    pub knn_k: usize,

    // Policy thresholds.
    pub proba_threshold: f64,
    pub cate_threshold: f64,
    pub uncer_threshold: Option<f64>,
    pub delta_uncer_threshold: f64,
    pub use_delta_uncer: bool,
    pub delta_orientation: DeltaOrientation,
    pub mode: PolicyMode,

    // Costs.
    pub c_uout: f64,
    pub c_t1: f64,

    // Resource pool.
    pub duration_kind: String,
    pub duration_seconds: f64,
    pub duration_mean: f64,
    pub duration_std: f64,
    pub duration_min: f64,
    pub duration_max: f64,
    pub resources: Vec<usize>,

    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        let mapping = ColumnMapping::default();
        let policy = PolicyConfig::default();
        let costs = CostParams::default();
        let tree = TreeParams::default();
        Settings {
            case_col: mapping.case_col,
            activity_col: mapping.activity_col,
            timestamp_col: mapping.timestamp_col,
            timestamp_format: mapping.timestamp_format,
            positive_activities: mapping.outcome_rule.positive,
            negative_activities: mapping.outcome_rule.negative,
            treatment_rule: mapping.treatment_rule,
            offer_activity: mapping.offer_activity,
            train_frac: 0.6,
            valid_frac: 0.2,
            test_frac: 0.2,
            max_prefix_percentile: 0.9,
            members: crate::ensemble::DEFAULT_MEMBERS,
            max_depth: tree.max_depth,
            min_leaf_count: tree.min_leaf_count,
            feature_subsample: tree.feature_subsample,
            row_subsample: tree.row_subsample,
            min_arm_size: UpliftParams::default().min_arm_size,
            knn_k: 10,
            proba_threshold: policy.proba_threshold,
            cate_threshold: policy.cate_threshold,
            uncer_threshold: policy.uncer_threshold,
            delta_uncer_threshold: policy.delta_uncer_threshold,
            use_delta_uncer: policy.use_delta_uncer,
            delta_orientation: policy.delta_orientation,
            mode: policy.mode,
            c_uout: costs.c_uout,
            c_t1: costs.c_t1,
            duration_kind: "fixed".to_string(),
            duration_seconds: 60.0,
            duration_mean: 30.0,
            duration_std: 10.0,
            duration_min: 1.0,
            duration_max: 60.0,
            resources: (1..=10).collect(),
            seed: 42,
        }
    }
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Accepts `1,2,5` or an inclusive range `1..10`.
fn parse_resources(value: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: usize = parse_as("resources", lo.trim())?;
        let hi: usize = parse_as("resources", hi.trim())?;
        if lo > hi {
            return Err(Error::Config(format!("empty resources range '{value}'")));
        }
        return Ok((lo..=hi).collect());
    }
    let list: Result<Vec<usize>> = parse_list(value)
        .iter()
        .map(|v| parse_as("resources", v))
        .collect();
    let list = list?;
    if list.is_empty() {
        return Err(Error::Config("resources list is empty".to_string()));
    }
    Ok(list)
}

fn fmt_resources(resources: &[usize]) -> String {
    let contiguous = resources.len() > 1
        && resources
            .windows(2)
            .all(|w| w[1] == w[0] + 1);
    if contiguous {
        format!("{}..{}", resources[0], resources[resources.len() - 1])
    } else {
        resources
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl Settings {
    /// Apply one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "case_col" => self.case_col = value.to_string(),
            "activity_col" => self.activity_col = value.to_string(),
            "timestamp_col" => self.timestamp_col = value.to_string(),
            "timestamp_format" => self.timestamp_format = value.to_string(),
            "positive_activities" => self.positive_activities = parse_list(value),
            "negative_activities" => self.negative_activities = parse_list(value),
            "treatment_rule" => self.treatment_rule = TreatmentRule::parse(value)?,
            "offer_activity" => self.offer_activity = value.to_string(),
            "train_frac" => self.train_frac = parse_as(key, value)?,
            "valid_frac" => self.valid_frac = parse_as(key, value)?,
            "test_frac" => self.test_frac = parse_as(key, value)?,
            "max_prefix_percentile" => self.max_prefix_percentile = parse_as(key, value)?,
            "members" => self.members = parse_as(key, value)?,
            "max_depth" => self.max_depth = parse_as(key, value)?,
            "min_leaf_count" => self.min_leaf_count = parse_as(key, value)?,
            "feature_subsample" => self.feature_subsample = parse_as(key, value)?,
            "row_subsample" => self.row_subsample = parse_as(key, value)?,
            "min_arm_size" => self.min_arm_size = parse_as(key, value)?,
            "knn_k" => self.knn_k = parse_as(key, value)?,
            "proba_threshold" => self.proba_threshold = parse_as(key, value)?,
            "cate_threshold" => self.cate_threshold = parse_as(key, value)?,
            "uncer_threshold" => {
                self.uncer_threshold = if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(parse_as(key, value)?)
                }
            }
            "delta_uncer_threshold" => self.delta_uncer_threshold = parse_as(key, value)?,
            "use_delta_uncer" => self.use_delta_uncer = parse_as(key, value)?,
            "delta_orientation" => {
                self.delta_orientation = match value {
                    "future_minus_current" => DeltaOrientation::FutureMinusCurrent,
                    "current_minus_future" => DeltaOrientation::CurrentMinusFuture,
                    other => {
                        return Err(Error::Config(format!(
                            "delta_orientation must be future_minus_current or \
                             current_minus_future, got '{other}'"
                        )))
                    }
                }
            }
            "mode" => {
                self.mode = match value {
                    "adjusted_gain" => PolicyMode::AdjustedGain,
                    "current_only" => PolicyMode::CurrentOnly,
                    other => {
                        return Err(Error::Config(format!(
                            "mode must be adjusted_gain or current_only, got '{other}'"
                        )))
                    }
                }
            }
            "c_uout" => self.c_uout = parse_as(key, value)?,
            "c_t1" => self.c_t1 = parse_as(key, value)?,
            "duration_kind" => {
                if !["fixed", "normal", "exponential"].contains(&value) {
                    return Err(Error::Config(format!(
                        "duration_kind must be fixed, normal or exponential, got '{value}'"
                    )));
                }
                self.duration_kind = value.to_string();
            }
            "duration_seconds" => self.duration_seconds = parse_as(key, value)?,
            "duration_mean" => self.duration_mean = parse_as(key, value)?,
            "duration_std" => self.duration_std = parse_as(key, value)?,
            "duration_min" => self.duration_min = parse_as(key, value)?,
            "duration_max" => self.duration_max = parse_as(key, value)?,
            "resources" => self.resources = parse_resources(value)?,
            "seed" => self.seed = parse_as(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a whole config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Settings> {
        let mut settings = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            settings.apply(key.trim(), value.trim())?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::parse(&text)
    }

    /// Full effective configuration as stable key-value pairs; parsing them
    /// back reproduces these settings exactly.
    pub fn to_key_values(&self) -> BTreeMap<String, String> {
        let mut kv = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            kv.insert(k.to_string(), v);
        };
        put("case_col", self.case_col.clone());
        put("activity_col", self.activity_col.clone());
        put("timestamp_col", self.timestamp_col.clone());
        put("timestamp_format", self.timestamp_format.clone());
        put("positive_activities", self.positive_activities.join(","));
        put("negative_activities", self.negative_activities.join(","));
        put("treatment_rule", self.treatment_rule.to_string());
        put("offer_activity", self.offer_activity.clone());
        put("train_frac", self.train_frac.to_string());
        put("valid_frac", self.valid_frac.to_string());
        put("test_frac", self.test_frac.to_string());
        put(
            "max_prefix_percentile",
            self.max_prefix_percentile.to_string(),
        );
        put("members", self.members.to_string());
        put("max_depth", self.max_depth.to_string());
        put("min_leaf_count", self.min_leaf_count.to_string());
        put("feature_subsample", self.feature_subsample.to_string());
        put("row_subsample", self.row_subsample.to_string());
        put("min_arm_size", self.min_arm_size.to_string());
        put("knn_k", self.knn_k.to_string());
        put("proba_threshold", self.proba_threshold.to_string());
        put("cate_threshold", self.cate_threshold.to_string());
        put(
            "uncer_threshold",
            self.uncer_threshold
                .map(|v| v.to_string())
                .unwrap_or_else(|| "none".to_string()),
        );
        put(
            "delta_uncer_threshold",
            self.delta_uncer_threshold.to_string(),
        );
        put("use_delta_uncer", self.use_delta_uncer.to_string());
        put(
            "delta_orientation",
            match self.delta_orientation {
                DeltaOrientation::FutureMinusCurrent => "future_minus_current".to_string(),
                DeltaOrientation::CurrentMinusFuture => "current_minus_future".to_string(),
            },
        );
        put(
            "mode",
            match self.mode {
                PolicyMode::AdjustedGain => "adjusted_gain".to_string(),
                PolicyMode::CurrentOnly => "current_only".to_string(),
            },
        );
        put("c_uout", self.c_uout.to_string());
        put("c_t1", self.c_t1.to_string());
        put("duration_kind", self.duration_kind.clone());
        put("duration_seconds", self.duration_seconds.to_string());
        put("duration_mean", self.duration_mean.to_string());
        put("duration_std", self.duration_std.to_string());
        put("duration_min", self.duration_min.to_string());
        put("duration_max", self.duration_max.to_string());
        put("resources", fmt_resources(&self.resources));
        put("seed", self.seed.to_string());
        kv
    }

    pub fn column_mapping(&self) -> ColumnMapping {
        ColumnMapping {
            case_col: self.case_col.clone(),
            activity_col: self.activity_col.clone(),
            timestamp_col: self.timestamp_col.clone(),
            timestamp_format: self.timestamp_format.clone(),
            outcome_rule: OutcomeRule {
                positive: self.positive_activities.clone(),
                negative: self.negative_activities.clone(),
            },
            treatment_rule: self.treatment_rule.clone(),
            offer_activity: self.offer_activity.clone(),
        }
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_leaf_count: self.min_leaf_count,
            feature_subsample: self.feature_subsample,
            row_subsample: self.row_subsample,
        }
    }

    pub fn uplift_params(&self) -> UpliftParams {
        UpliftParams {
            members: self.members,
            tree: self.tree_params(),
            min_arm_size: self.min_arm_size,
        }
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            proba_threshold: self.proba_threshold,
            cate_threshold: self.cate_threshold,
            uncer_threshold: self.uncer_threshold,
            delta_uncer_threshold: self.delta_uncer_threshold,
            use_delta_uncer: self.use_delta_uncer,
            delta_orientation: self.delta_orientation,
            mode: self.mode,
        }
    }

    pub fn cost_params(&self) -> CostParams {
        CostParams {
            c_uout: self.c_uout,
            c_t1: self.c_t1,
        }
    }

    pub fn duration_dist(&self) -> Result<DurationDist> {
        match self.duration_kind.as_str() {
            "fixed" => Ok(DurationDist::Fixed {
                seconds: self.duration_seconds,
            }),
            "normal" => Ok(DurationDist::Normal {
                mean: self.duration_mean,
                std: self.duration_std,
                min: self.duration_min,
                max: self.duration_max,
            }),
            "exponential" => Ok(DurationDist::Exponential {
                mean: self.duration_mean,
                min: self.duration_min,
                max: self.duration_max,
            }),
            other => Err(Error::Config(format!("unknown duration_kind '{other}'"))),
        }
    }
}
