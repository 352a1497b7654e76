//! Command-line front end over the library pipeline.
//!
//! Five subcommands cover the artifact chain: `synth` writes an event log,
//! `train` fits the outcome and uplift models, `index` adds the future-state
//! lookup to form a full bundle, `replay` re-enacts held-out traces under the
//! configured policy, and `sweep` grids the preset policies over resource
//! budgets. Every command that writes artifacts also writes a run manifest.
//!
//! Exit codes: 0 on success, 1 on any pipeline error, 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prpm::allocator::PoolConfig;
use prpm::config::Settings;
use prpm::manifest::RunManifest;
use prpm::pipeline::{self, LoadedLog, TrainedModels};
use prpm::policy::NamedPolicy;
use prpm::replay::{
    emit_report, generate_synthetic_log, run, write_event_log_file, ModelBundle, SynthSpec,
};
use prpm::Result;

#[derive(Parser)]
#[command(
    name = "prpm",
    version,
    about = "Prescriptive process monitoring: decide when to intervene in ongoing cases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic event-log CSV.
    Synth(SynthCmd),
    /// Train the outcome ensemble and uplift model from an event log.
    Train(TrainCmd),
    /// Build the future-state index and assemble the full model bundle.
    Index(IndexCmd),
    /// Replay held-out traces under the configured policy.
    Replay(ReplayCmd),
    /// Sweep the preset policies across the resource grid.
    Sweep(SweepCmd),
}

/// Configuration source shared by the pipeline commands. Precedence:
/// `--seed` and `--set` flags over the `--config` file over built-in
/// defaults.
#[derive(Args)]
struct ConfigArgs {
    /// Config file with one `key = value` per line (`#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, repeatable: `--set members=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed; overrides the config `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn settings(&self) -> Result<Settings> {
        let mut settings = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        for kv in &self.overrides {
            let (key, value) = kv.split_once('=').ok_or_else(|| {
                prpm::Error::Config(format!("--set expects KEY=VALUE, got '{kv}'"))
            })?;
            settings.apply(key.trim(), value.trim())?;
        }
        if let Some(seed) = self.seed {
            settings.seed = seed;
        }
        Ok(settings)
    }
}

#[derive(Args)]
struct SynthCmd {
    /// Output CSV path; a manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    middle_activities: Option<usize>,
    #[arg(long)]
    base_rate: Option<f64>,
    #[arg(long)]
    uplift: Option<f64>,
    #[arg(long)]
    uplift_slope: Option<f64>,
    #[arg(long)]
    treated_fraction: Option<f64>,
    #[arg(long)]
    ood_fraction: Option<f64>,
    #[arg(long)]
    ood_negative_rate: Option<f64>,
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    inter_arrival_seconds: Option<f64>,
    #[arg(long)]
    event_gap_seconds: Option<f64>,
    /// Generator seed; unset knobs keep the generator defaults.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct TrainCmd {
    /// Event-log CSV.
    #[arg(long)]
    log: PathBuf,
    /// Directory for `models.json` and `manifest.json`.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct IndexCmd {
    /// Event-log CSV (the same log the models were trained on).
    #[arg(long)]
    log: PathBuf,
    /// `models.json` produced by `train`.
    #[arg(long)]
    models: PathBuf,
    /// Directory for `bundle.json` and `manifest.json`.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct ReplayCmd {
    /// Event-log CSV; the temporal test split is replayed.
    #[arg(long)]
    log: PathBuf,
    /// `bundle.json` produced by `index`.
    #[arg(long)]
    bundle: PathBuf,
    /// Directory for the summary, the treatment ledger, and the manifest.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepCmd {
    /// Event-log CSV; the temporal test split is replayed.
    #[arg(long)]
    log: PathBuf,
    /// `bundle.json` produced by `index`.
    #[arg(long)]
    bundle: PathBuf,
    /// Directory for the summary, per-cell ledgers, and the manifest.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(cmd) => synth(cmd),
        Command::Train(cmd) => train(cmd),
        Command::Index(cmd) => index(cmd),
        Command::Replay(cmd) => replay(cmd),
        Command::Sweep(cmd) => sweep(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_and_report(path: &Path, settings: &Settings) -> Result<LoadedLog> {
    let loaded = pipeline::load_log(path, settings)?;
    if !loaded.issues.is_empty() {
        eprintln!(
            "warning: skipped {} malformed rows (first: line {}: {})",
            loaded.issues.len(),
            loaded.issues[0].line,
            loaded.issues[0].message
        );
    }
    if loaded.removed > 0 {
        eprintln!(
            "warning: dropped {} incomplete cases without a terminal outcome event",
            loaded.removed
        );
    }
    Ok(loaded)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| prpm::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn synth(cmd: &SynthCmd) -> Result<()> {
    let mut spec = SynthSpec::default();
    macro_rules! override_knob {
        ($($field:ident),*) => {
            $(if let Some(v) = cmd.$field { spec.$field = v; })*
        };
    }
    override_knob!(
        cases,
        middle_activities,
        base_rate,
        uplift,
        uplift_slope,
        treated_fraction,
        ood_fraction,
        ood_negative_rate,
        min_len,
        max_len,
        inter_arrival_seconds,
        event_gap_seconds
    );

    let traces = generate_synthetic_log(&spec, cmd.seed);
    if let Some(parent) = cmd.out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    write_event_log_file(&traces, &cmd.out)?;

    let mut manifest = RunManifest::new("synth", cmd.seed, spec.to_key_values());
    manifest.record_output(&cmd.out);
    let manifest_path = cmd.out.with_extension("manifest.json");
    manifest.write_at(&manifest_path)?;

    let events: usize = traces.iter().map(|t| t.len()).sum();
    println!(
        "wrote {} cases ({events} events) to {}",
        traces.len(),
        cmd.out.display()
    );
    Ok(())
}

fn train(cmd: &TrainCmd) -> Result<()> {
    let settings = cmd.config.settings()?;
    let loaded = load_and_report(&cmd.log, &settings)?;
    let split = pipeline::split_traces(loaded.traces, &settings)?;
    let models = pipeline::train_models(&split.train, &settings)?;

    ensure_dir(&cmd.out_dir)?;
    let models_path = cmd.out_dir.join("models.json");
    pipeline::save_json(&models, &models_path)?;

    let mut manifest = RunManifest::for_settings("train", &settings);
    manifest.record_input(&cmd.log)?;
    manifest.record_output(&models_path);
    manifest.write(&cmd.out_dir)?;

    println!(
        "trained {} members over {} features on {} train traces; wrote {}",
        models.ensemble.member_count(),
        models.schema.len(),
        split.train.len(),
        models_path.display()
    );
    Ok(())
}

fn index(cmd: &IndexCmd) -> Result<()> {
    let settings = cmd.config.settings()?;
    let loaded = load_and_report(&cmd.log, &settings)?;
    let split = pipeline::split_traces(loaded.traces, &settings)?;
    let models: TrainedModels = pipeline::load_json(&cmd.models)?;
    let history = pipeline::build_index(&models, &split.train, &settings)?;
    let bundle = ModelBundle {
        schema: models.schema,
        ensemble: models.ensemble,
        uplift: models.uplift,
        index: history,
        knn_k: settings.knn_k,
    };

    ensure_dir(&cmd.out_dir)?;
    let bundle_path = cmd.out_dir.join("bundle.json");
    pipeline::save_json(&bundle, &bundle_path)?;

    let mut manifest = RunManifest::for_settings("index", &settings);
    manifest.record_input(&cmd.log)?;
    manifest.record_input(&cmd.models)?;
    manifest.record_output(&bundle_path);
    manifest.write(&cmd.out_dir)?;

    println!(
        "indexed {} prefix entries across {} lengths; wrote {}",
        bundle.index.entry_count(),
        bundle.index.bucket_count(),
        bundle_path.display()
    );
    Ok(())
}

fn replay(cmd: &ReplayCmd) -> Result<()> {
    let settings = cmd.config.settings()?;
    let loaded = load_and_report(&cmd.log, &settings)?;
    let split = pipeline::split_traces(loaded.traces, &settings)?;
    let bundle: ModelBundle = pipeline::load_json(&cmd.bundle)?;

    let policy = NamedPolicy {
        name: "configured".to_string(),
        config: settings.policy_config(),
    };
    let pool = PoolConfig {
        capacity: settings.resources[0],
        duration: settings.duration_dist()?,
    };
    let report = run(
        &split.test,
        &bundle,
        &policy,
        &settings.cost_params(),
        &pool,
        pipeline::replay_seed(settings.seed),
    )?;

    let paths = emit_report(std::slice::from_ref(&report), &cmd.out_dir)?;
    let mut manifest = RunManifest::for_settings("replay", &settings);
    manifest.record_input(&cmd.log)?;
    manifest.record_input(&cmd.bundle)?;
    for path in &paths {
        manifest.record_output(path);
    }
    manifest.write(&cmd.out_dir)?;

    println!(
        "replayed {} test traces with {} resources: treated {}, total gain {}",
        split.test.len(),
        report.resources,
        report.treated_count,
        report.total_gain
    );
    Ok(())
}

fn sweep(cmd: &SweepCmd) -> Result<()> {
    let settings = cmd.config.settings()?;
    let loaded = load_and_report(&cmd.log, &settings)?;
    let split = pipeline::split_traces(loaded.traces, &settings)?;
    let bundle: ModelBundle = pipeline::load_json(&cmd.bundle)?;

    let reports = pipeline::sweep_presets(&split.test, &bundle, &settings)?;
    let paths = emit_report(&reports, &cmd.out_dir)?;

    let mut manifest = RunManifest::for_settings("sweep", &settings);
    manifest.record_input(&cmd.log)?;
    manifest.record_input(&cmd.bundle)?;
    for path in &paths {
        manifest.record_output(path);
    }
    manifest.write(&cmd.out_dir)?;

    println!(
        "swept {} policies x {} resource levels on {} test traces; wrote {}",
        reports.len() / settings.resources.len().max(1),
        settings.resources.len(),
        split.test.len(),
        cmd.out_dir.join("summary.csv").display()
    );
    Ok(())
}
