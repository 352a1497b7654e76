//! End-to-end orchestration: raw CSV log → cleaned traces → temporal split →
//! trained models → history index → replay-ready bundle. The CLI, the
//! examples, and the integration tests all drive these functions rather than
//! re-wiring the stages themselves.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::causal::{fit_uplift, CausalDataset, UpliftModel};
use crate::config::Settings;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::event_log::{
    clean, extract_prefixes, parse_log, temporal_split, FeatureSchema, RecordIssue, TemporalSplit,
    Trace,
};
use crate::future_state::HistoryIndex;
use crate::policy::{preset_policies, NamedPolicy};
use crate::replay::{sweep, ModelBundle, PreparedReplay, ReplayReport};
use crate::seed::derive_seed;

/// Seed lanes: each stage derives its own stream from the master seed, so
/// re-tuning one stage never shifts another stage's randomness.
const ENSEMBLE_LANE: u64 = 1;
const UPLIFT_LANE: u64 = 2;
const REPLAY_LANE: u64 = 3;

/// Stream seed for the replay/sweep stage under `master_seed`.
pub fn replay_seed(master_seed: u64) -> u64 {
    derive_seed(master_seed, REPLAY_LANE)
}

/// A parsed and cleaned event log.
#[derive(Debug)]
pub struct LoadedLog {
    pub traces: Vec<Trace>,
    /// Rows skipped during parsing.
    pub issues: Vec<RecordIssue>,
    /// Traces dropped for lacking a terminal outcome event.
    pub removed: usize,
}

/// Parse a CSV log and drop incomplete cases.
pub fn load_log(path: &Path, settings: &Settings) -> Result<LoadedLog> {
    let parsed = parse_log(path, &settings.column_mapping())?;
    let (traces, removed) = clean(parsed.traces);
    Ok(LoadedLog {
        traces,
        issues: parsed.issues,
        removed,
    })
}

/// Split cleaned traces by case arrival time using the configured fractions.
pub fn split_traces(traces: Vec<Trace>, settings: &Settings) -> Result<TemporalSplit> {
    temporal_split(
        traces,
        settings.train_frac,
        settings.valid_frac,
        settings.test_frac,
    )
}

/// Outcome ensemble and uplift model with the schema they were trained under.
/// The history index is built separately so the two artifacts can be produced
/// (and re-produced) by independent commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModels {
    pub schema: FeatureSchema,
    pub ensemble: Ensemble,
    pub uplift: UpliftModel,
}

/// Train the outcome ensemble and the two-arm uplift model on prefix
/// instances extracted from the training traces.
pub fn train_models(train: &[Trace], settings: &Settings) -> Result<TrainedModels> {
    let schema = FeatureSchema::infer(train, &settings.offer_activity);
    let groups = extract_prefixes(train, settings.max_prefix_percentile, &schema);

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut causal = CausalDataset::default();
    for group in &groups {
        for inst in &group.instances {
            let negative = inst.label == crate::event_log::OutcomeLabel::Negative;
            features.push(inst.features.clone());
            labels.push(negative);
            causal.push(inst.features.clone(), negative, inst.treated);
        }
    }

    let ensemble = Ensemble::train(
        &features,
        &labels,
        settings.members,
        &settings.tree_params(),
        derive_seed(settings.seed, ENSEMBLE_LANE),
    )?;
    let uplift = fit_uplift(
        &causal,
        &settings.uplift_params(),
        derive_seed(settings.seed, UPLIFT_LANE),
    )?;
    Ok(TrainedModels {
        schema,
        ensemble,
        uplift,
    })
}

/// Score every training prefix under the trained models and bucket the
/// results by prefix length.
pub fn build_index(
    models: &TrainedModels,
    train: &[Trace],
    settings: &Settings,
) -> Result<HistoryIndex> {
    let groups = extract_prefixes(train, settings.max_prefix_percentile, &models.schema);
    HistoryIndex::build(&groups, &models.ensemble, &models.uplift)
}

/// One-shot path: clean, split, train, index. Returns the bundle together
/// with the split so callers can replay on the held-out test traces.
pub fn train_pipeline(
    traces: Vec<Trace>,
    settings: &Settings,
) -> Result<(ModelBundle, TemporalSplit)> {
    let (kept, _removed) = clean(traces);
    let split = split_traces(kept, settings)?;
    let models = train_models(&split.train, settings)?;
    let index = build_index(&models, &split.train, settings)?;
    let bundle = ModelBundle {
        schema: models.schema,
        ensemble: models.ensemble,
        uplift: models.uplift,
        index,
        knn_k: settings.knn_k,
    };
    Ok((bundle, split))
}

/// Score the test traces once, then sweep the four preset policies over the
/// configured resource grid.
pub fn sweep_presets(
    test: &[Trace],
    bundle: &ModelBundle,
    settings: &Settings,
) -> Result<Vec<ReplayReport>> {
    let prepared = PreparedReplay::prepare(test, bundle)?;
    sweep_prepared(&prepared, &preset_policies(), settings)
}

/// Sweep arbitrary policies over an already-scored replay.
pub fn sweep_prepared(
    prepared: &PreparedReplay,
    policies: &[NamedPolicy],
    settings: &Settings,
) -> Result<Vec<ReplayReport>> {
    sweep(
        prepared,
        policies,
        &settings.resources,
        &settings.duration_dist()?,
        &settings.cost_params(),
        replay_seed(settings.seed),
    )
}

/// Serialize any artifact to pretty JSON at `path`.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(Error::Model)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Load an artifact previously written by [`save_json`].
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(Error::Model)
}
