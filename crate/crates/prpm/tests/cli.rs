//! End-to-end checks of the command-line binary: exit codes, the artifact
//! chain, config precedence, and manifest integrity.

use std::path::Path;
use std::process::{Command, Output};

use prpm::manifest::{sha256_file, RunManifest};

fn prpm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prpm"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn help_and_version_exit_zero() {
    let out = prpm().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["synth", "train", "index", "replay", "sweep"] {
        assert!(text.contains(sub), "--help must list the {sub} subcommand");
    }
    assert_eq!(prpm().arg("--version").output().unwrap().status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(prpm().arg("nonsense").output().unwrap().status.code(), Some(2));
    // Missing the mandatory --out.
    assert_eq!(prpm().arg("synth").output().unwrap().status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_one_with_the_path() {
    let out = prpm()
        .args(["train", "--log", "/no/such/log.csv", "--out-dir", "/tmp/unused"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("/no/such/log.csv"),
        "diagnostic must name the missing file, got: {stderr}"
    );
}

#[test]
fn full_artifact_chain_produces_consistent_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let log = root.join("log.csv");

    run_ok(prpm().args([
        "synth",
        "--out",
        log.to_str().unwrap(),
        "--cases",
        "400",
        "--seed",
        "9",
    ]));
    assert!(log.is_file());
    let synth_manifest = RunManifest::load(&root.join("log.manifest.json")).unwrap();
    assert_eq!(synth_manifest.command, "synth");
    assert_eq!(synth_manifest.seed, 9);
    assert_eq!(synth_manifest.config["cases"], "400");

    // Keep the model small so the chain stays fast.
    let small = ["--set", "members=4", "--set", "max_depth=4"];

    let models_dir = root.join("models");
    run_ok(
        prpm()
            .args(["train", "--log", log.to_str().unwrap(), "--out-dir"])
            .arg(&models_dir)
            .args(small),
    );
    let models_path = models_dir.join("models.json");
    assert!(models_path.is_file());

    let manifest = RunManifest::load(&models_dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.command, "train");
    assert_eq!(manifest.config["members"], "4");
    // Input digests in the manifest match the actual file bytes.
    for (path, digest) in &manifest.inputs {
        assert_eq!(&sha256_file(Path::new(path)).unwrap(), digest);
    }
    assert_eq!(manifest.inputs.len(), 1);

    let bundle_dir = root.join("bundle");
    run_ok(
        prpm()
            .args([
                "index",
                "--log",
                log.to_str().unwrap(),
                "--models",
                models_path.to_str().unwrap(),
                "--out-dir",
            ])
            .arg(&bundle_dir)
            .args(small),
    );
    let bundle_path = bundle_dir.join("bundle.json");
    assert!(bundle_path.is_file());
    let manifest = RunManifest::load(&bundle_dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.inputs.len(), 2, "index hashes the log and the models");

    let replay_dir = root.join("replay");
    run_ok(
        prpm()
            .args([
                "replay",
                "--log",
                log.to_str().unwrap(),
                "--bundle",
                bundle_path.to_str().unwrap(),
                "--out-dir",
            ])
            .arg(&replay_dir)
            .args(small)
            .args(["--set", "resources=2"]),
    );
    let summary = std::fs::read_to_string(replay_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2, "header plus one configured-policy row");
    assert!(summary.lines().nth(1).unwrap().starts_with("configured,2,"));

    let sweep_dir = root.join("sweep");
    run_ok(
        prpm()
            .args([
                "sweep",
                "--log",
                log.to_str().unwrap(),
                "--bundle",
                bundle_path.to_str().unwrap(),
                "--out-dir",
            ])
            .arg(&sweep_dir)
            .args(small),
    );
    let summary = std::fs::read_to_string(sweep_dir.join("summary.csv")).unwrap();
    // Four preset policies over the default 1..=10 resource grid.
    assert_eq!(summary.lines().count(), 1 + 4 * 10);
    let manifest = RunManifest::load(&sweep_dir.join("manifest.json")).unwrap();
    // summary.csv plus one ledger per cell, all recorded as outputs.
    assert_eq!(manifest.outputs.len(), 1 + 4 * 10);
    for output in &manifest.outputs {
        assert!(Path::new(output).is_file(), "recorded output {output} missing");
    }
}

#[test]
fn config_file_applies_and_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let log = root.join("log.csv");
    run_ok(prpm().args(["synth", "--out", log.to_str().unwrap(), "--cases", "300"]));

    let config = root.join("settings.conf");
    std::fs::write(&config, "members = 4\nmax_depth = 3\nseed = 5\n").unwrap();

    let out_dir = root.join("models");
    run_ok(
        prpm()
            .args(["train", "--log", log.to_str().unwrap(), "--out-dir"])
            .arg(&out_dir)
            .args(["--config", config.to_str().unwrap()])
            .args(["--set", "max_depth=4", "--seed", "11"]),
    );
    let manifest = RunManifest::load(&out_dir.join("manifest.json")).unwrap();
    assert_eq!(manifest.config["members"], "4", "config file value applies");
    assert_eq!(manifest.config["max_depth"], "4", "--set beats the config file");
    assert_eq!(manifest.seed, 11, "--seed beats the config file");

    // An unknown key in the config file is a pipeline error, not a crash.
    std::fs::write(&config, "mystery = 1\n").unwrap();
    let out = prpm()
        .args(["train", "--log", log.to_str().unwrap(), "--out-dir"])
        .arg(root.join("unused"))
        .args(["--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mystery"));
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    run_ok(prpm().args(["synth", "--out", a.to_str().unwrap(), "--cases", "200", "--seed", "3"]));
    run_ok(prpm().args(["synth", "--out", b.to_str().unwrap(), "--cases", "200", "--seed", "3"]));
    run_ok(prpm().args(["synth", "--out", c.to_str().unwrap(), "--cases", "200", "--seed", "4"]));
    assert_eq!(sha256_file(&a).unwrap(), sha256_file(&b).unwrap());
    assert_ne!(sha256_file(&a).unwrap(), sha256_file(&c).unwrap());
}
