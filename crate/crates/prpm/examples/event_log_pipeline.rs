//! From a raw event-log CSV to model-ready prefix datasets.
//!
//! The ingestion chain: parse rows into time-ordered traces, derive each
//! case's outcome and treatment labels from its events, drop incomplete
//! cases, split temporally by arrival, then expand every training trace into
//! fixed-length prefixes encoded as numeric vectors under one inferred
//! feature schema.
//!
//! ```bash
//! cargo run -p prpm --example event_log_pipeline
//! ```

use prpm::config::Settings;
use prpm::event_log::{clean, extract_prefixes, parse_log, temporal_split, FeatureSchema};
use prpm::replay::{generate_synthetic_log, write_event_log_file, SynthSpec};

fn main() {
    // A small synthetic log, round-tripped through an actual CSV file.
    let spec = SynthSpec { cases: 300, ..SynthSpec::default() };
    let traces = generate_synthetic_log(&spec, 12);
    let dir = std::env::temp_dir().join("prpm_event_log_pipeline");
    std::fs::create_dir_all(&dir).unwrap();
    let log_path = dir.join("log.csv");
    write_event_log_file(&traces, &log_path).unwrap();
    println!("wrote {}", log_path.display());

    let settings = Settings::default();
    let parsed = parse_log(&log_path, &settings.column_mapping()).unwrap();
    println!(
        "parsed {} traces, {} malformed rows skipped",
        parsed.traces.len(),
        parsed.issues.len()
    );

    let (kept, removed) = clean(parsed.traces);
    println!("cleaned: {} kept, {} without a terminal outcome removed", kept.len(), removed);

    let treated = kept.iter().filter(|t| t.treated).count();
    let negative = kept
        .iter()
        .filter(|t| t.outcome == Some(prpm::event_log::OutcomeLabel::Negative))
        .count();
    println!(
        "labels: {treated} treated (second offer made), {negative} ended in a negative outcome"
    );

    let split = temporal_split(kept, 0.6, 0.2, 0.2).unwrap();
    println!(
        "temporal split by arrival: {} train / {} valid / {} test",
        split.train.len(),
        split.valid.len(),
        split.test.len()
    );
    println!();

    // One schema, frozen on the training split, encodes every prefix.
    let schema = FeatureSchema::infer(&split.train, &settings.offer_activity);
    println!("inferred feature schema ({} features):", schema.len());
    for name in schema.feature_names() {
        println!("  {name}");
    }
    println!();

    let groups = extract_prefixes(&split.train, 0.9, &schema);
    let instances: usize = groups.iter().map(|g| g.instances.len()).sum();
    println!(
        "prefix expansion up to the 90th-percentile length: {} instances in {} length groups",
        instances,
        groups.len()
    );

    // Show one encoded instance end to end.
    let inst = &groups[2].instances[0];
    println!();
    println!(
        "case {} at prefix length {} (label {:?}, treated {}):",
        inst.case_id, inst.prefix_len, inst.label, inst.treated
    );
    for (name, value) in schema.feature_names().iter().zip(&inst.features) {
        println!("  {name:<22} {value}");
    }
}
