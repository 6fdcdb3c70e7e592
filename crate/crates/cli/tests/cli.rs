//! Configuration loading rules and end-to-end binary behavior.

use std::path::Path;
use std::process::{Command, Output};

use g2r_cli::{
    apply_override, dump_config, load_config, parse_set, validate_value, CliError, EnhancerKind,
    MasterConfig, RunMode,
};
use g2r_engine::yamlv::Issue;
use sha2::{Digest, Sha256};

fn validate(text: &str) -> Result<(MasterConfig, Vec<String>), Vec<Issue>> {
    let value: serde_yaml::Value = serde_yaml::from_str(text).expect("test yaml parses");
    validate_value(&value)
}

fn issues(text: &str) -> Vec<Issue> {
    validate(text).expect_err("expected validation issues")
}

#[test]
fn empty_document_yields_documented_defaults() {
    let (config, defaults) = validate("").expect("empty config is valid");
    assert_eq!(config, MasterConfig::default());
    assert_eq!(config.engine.width, 960);
    assert_eq!(config.engine.height, 540);
    assert_eq!(config.engine.fixed_dt, 0.05);
    assert_eq!(config.pipeline.mode, RunMode::Sync);
    assert_eq!(config.enhancer.kind, EnhancerKind::Identity);
    assert!(config.capture.is_none());
    assert!(defaults.iter().any(|l| l == "engine.width = 960"));
    assert!(defaults.iter().any(|l| l == "engine.weather = clear_noon"));
    assert!(defaults.iter().any(|l| l == "pipeline.skip = 0"));
    assert!(defaults.iter().any(|l| l == "enhancer.kind = identity"));
}

#[test]
fn typo_suggests_nearest_key() {
    let all = issues("piplines:\n  skip: 3\n");
    assert!(all.iter().any(|i| matches!(
        i,
        Issue::UnknownField { field, suggestion: Some(s), .. }
            if field == "piplines" && s == "pipeline"
    )));
}

#[test]
fn nested_typo_keeps_path() {
    let all = issues("pipeline:\n  skp: 3\n");
    assert!(all.iter().any(|i| matches!(
        i,
        Issue::UnknownField { path, field, suggestion: Some(s) }
            if path == "pipeline" && field == "skp" && s == "skip"
    )));
}

#[test]
fn all_problems_reported_in_one_pass() {
    let text = "
engine:
  width: 4
  weather: molten
pipeline:
  pipeline_depth: 0
  skip: -1
";
    let all = issues(text);
    assert!(all.len() >= 4, "got {all:?}");
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::RangeViolation { path, .. } if path == "engine.width")));
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::BadEnum { path, .. } if path == "engine.weather")));
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::RangeViolation { path, .. } if path == "pipeline.pipeline_depth")));
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::TypeMismatch { path, .. } if path == "pipeline.skip")));
}

#[test]
fn engine_and_pipeline_modes_must_match() {
    let all = issues("engine:\n  mode: async\n");
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::Conflict { path, .. } if path == "pipeline.mode")));
    let all = issues("pipeline:\n  mode: async\n");
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::Conflict { path, .. } if path == "pipeline.mode")));
    let (config, _) = validate("engine:\n  mode: async\npipeline:\n  mode: async\n")
        .expect("matching modes are valid");
    assert_eq!(config.engine.mode, RunMode::Async);
}

#[test]
fn capture_requires_sync_mode() {
    let text = "
engine:
  mode: async
pipeline:
  mode: async
capture:
  out_dir: /tmp/x
";
    let all = issues(text);
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::Conflict { path, .. } if path == "capture")));
}

#[test]
fn capture_requires_model_resolution_to_match_engine() {
    let text = "
pipeline:
  model_width: 480
  model_height: 270
capture:
  out_dir: /tmp/x
";
    let all = issues(text);
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::Conflict { path, .. } if path == "pipeline.model_width")));
}

#[test]
fn boxes_product_needs_annotation_channels() {
    let text = "
pipeline:
  subscribe: [rgb, g_buffers, stencil]
capture:
  products: [boxes]
";
    let all = issues(text);
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::Conflict { path, .. } if path == "capture.products")));
}

#[test]
fn capture_widens_default_subscription() {
    let (config, _) = validate("capture:\n  out_dir: /tmp/x\n").expect("valid");
    assert_eq!(config.pipeline.subscribe.len(), 6);
    let (config, _) = validate("").expect("valid");
    assert_eq!(config.pipeline.subscribe.len(), 3);
}

#[test]
fn preprocessing_channels_are_mandatory() {
    let all = issues("pipeline:\n  subscribe: [rgb]\n");
    let conflicts = all
        .iter()
        .filter(|i| matches!(i, Issue::Conflict { path, .. } if path == "pipeline.subscribe"))
        .count();
    assert_eq!(conflicts, 2, "g_buffers and stencil both missing: {all:?}");
}

#[test]
fn duplicate_subscription_conflicts() {
    let all = issues("pipeline:\n  subscribe: [rgb, g_buffers, stencil, rgb]\n");
    assert!(all.iter().any(
        |i| matches!(i, Issue::Conflict { path, detail } if path.starts_with("pipeline.subscribe[") && detail.contains("duplicate"))
    ));
}

#[test]
fn enhancer_kind_prerequisites() {
    let all = issues("enhancer:\n  kind: stats_match\n");
    assert!(all.iter().any(|i| matches!(
        i,
        Issue::MissingField { path, field } if path == "enhancer" && field == "stats_path"
    )));
    let all = issues("enhancer:\n  kind: external\n");
    assert!(all.iter().any(|i| matches!(
        i,
        Issue::MissingField { path, field } if path == "enhancer" && field == "endpoint"
    )));
    let all = issues("enhancer:\n  precision: int8_emulated\n");
    assert!(all.iter().any(|i| matches!(
        i,
        Issue::MissingField { path, field } if path == "enhancer" && field == "calibration"
    )));
}

#[test]
fn calibration_scales_must_be_three() {
    let text = "
enhancer:
  precision: int8_emulated
  calibration:
    scales: [0.1, 0.2]
";
    let all = issues(text);
    assert!(all.iter().any(
        |i| matches!(i, Issue::Conflict { path, detail } if path == "enhancer.calibration.scales" && detail.contains("3"))
    ));
}

#[test]
fn overrides_create_paths_and_last_one_wins() {
    let mut root = serde_yaml::Value::Null;
    apply_override(&mut root, "engine.seed", "3").unwrap();
    apply_override(&mut root, "engine.seed", "9").unwrap();
    apply_override(&mut root, "eval.skips", "[0, 2]").unwrap();
    let (config, _) = validate_value(&root).expect("valid");
    assert_eq!(config.engine.seed, 9);
    assert_eq!(config.eval.skips, vec![0, 2]);
}

#[test]
fn override_through_scalar_is_rejected() {
    let mut root = serde_yaml::Value::Null;
    apply_override(&mut root, "engine.width", "64").unwrap();
    let err = apply_override(&mut root, "engine.width.deep", "1").unwrap_err();
    assert!(matches!(err, CliError::BadOverride { .. }));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn parse_set_splits_on_first_equals() {
    assert_eq!(
        parse_set("capture.out_dir=/a=b").unwrap(),
        ("capture.out_dir".into(), "/a=b".into())
    );
    assert!(parse_set("nope").is_err());
    assert!(parse_set("=value").is_err());
}

#[test]
fn overridden_values_still_validated() {
    let mut root = serde_yaml::Value::Null;
    apply_override(&mut root, "engine.width", "4").unwrap();
    let all = validate_value(&root).expect_err("width 4 is below the floor");
    assert!(all
        .iter()
        .any(|i| matches!(i, Issue::RangeViolation { path, .. } if path == "engine.width")));
}

#[test]
fn dump_reloads_to_the_same_config() {
    let text = "
engine:
  width: 128
  height: 72
  seed: 11
  weather: clear_sunset
pipeline:
  skip: 2
  subscribe: [rgb, g_buffers, stencil, lidar, vehicle_status, actor_ids]
enhancer:
  precision: int8_emulated
  calibration:
    scales: [0.01, 0.02, 0.03]
capture:
  out_dir: /tmp/ds
  buffer_container: none
  products: [frame, enhanced_frame, boxes, vehicle_status]
eval:
  skips: [0, 3]
";
    let (config, _) = validate(text).expect("valid");
    assert!(config.capture.as_ref().unwrap().buffer_container.is_none());
    let dumped = dump_config(&config);
    let (reloaded, defaults) = validate(&dumped).expect("dump reloads");
    assert_eq!(reloaded, config);
    assert!(defaults.is_empty(), "dump must be complete: {defaults:?}");
}

#[test]
fn null_sections_mean_defaults() {
    let (config, _) = validate("engine: null\npipeline:\n").expect("valid");
    assert_eq!(config, MasterConfig::default());
}

#[test]
fn load_config_reports_missing_file_as_input() {
    let err = load_config(Some(Path::new("/nonexistent/zz.yaml")), &[]).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert_eq!(err.class(), "input");
}

#[test]
fn error_json_carries_class_code_and_issues() {
    let err = CliError::Config(vec![Issue::Conflict {
        path: "pipeline.mode".into(),
        detail: "boom".into(),
    }]);
    let json = err.to_json();
    assert_eq!(json["error"]["class"], "config");
    assert_eq!(json["error"]["code"], 3);
    assert!(json["error"]["issues"][0]
        .as_str()
        .unwrap()
        .contains("boom"));
}

// ---- binary tests ----------------------------------------------------

fn g2r() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_g2r"));
    // Host G2R_ variables must not leak into test runs.
    for (key, _) in std::env::vars() {
        if key.starts_with("G2R_") {
            cmd.env_remove(key);
        }
    }
    cmd.arg("--quiet");
    cmd
}

fn small(cmd: &mut Command) -> &mut Command {
    cmd.args([
        "--set",
        "engine.width=64",
        "--set",
        "engine.height=36",
        "--set",
        "pipeline.ticks=6",
    ])
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn bin_run_emits_stats_json() {
    let out = small(g2r().arg("run"))
        .arg("--emit-stats")
        .output()
        .unwrap();
    let stats = stdout_json(&out);
    assert_eq!(stats["mode"], "sync");
    assert_eq!(stats["frames_enhanced"], 6);
    assert_eq!(stats["max_staleness"], 0);
}

#[test]
fn bin_env_overrides_and_set_precedence() {
    // The environment sets 3 ticks, --set raises it to 4: --set wins.
    let out = g2r()
        .env("G2R_PIPELINE__TICKS", "3")
        .args([
            "--set",
            "engine.width=64",
            "--set",
            "engine.height=36",
            "--set",
            "pipeline.ticks=4",
        ])
        .args(["run", "--emit-stats"])
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["frames_enhanced"], 4);

    // Alone, the environment override applies.
    let out = g2r()
        .env("G2R_PIPELINE__TICKS", "3")
        .args(["--set", "engine.width=64", "--set", "engine.height=36"])
        .args(["run", "--emit-stats"])
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["frames_enhanced"], 3);
}

#[test]
fn bin_defaults_are_logged_without_quiet() {
    let out = Command::new(env!("CARGO_BIN_EXE_g2r"))
        .args([
            "--set",
            "engine.width=64",
            "--set",
            "engine.height=36",
            "--set",
            "pipeline.ticks=1",
            "run",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("default: engine.seed = 0"), "stderr: {err}");
    assert!(err.contains("default: pipeline.skip = 0"));
}

fn config_file(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.yaml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bin_capture_writes_products_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("ds");
    let cfg = config_file(
        dir.path(),
        &format!(
            "
engine: {{width: 64, height: 36}}
pipeline: {{ticks: 40}}
capture:
  out_dir: {}
  every_n: 20
",
            out_dir.display()
        ),
    );
    let out = g2r()
        .args(["--config", cfg.to_str().unwrap(), "capture"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let manifest = g2r_datagen::read_manifest(&out_dir.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.len(), 2);
    assert_eq!(manifest[0].frame_id, 20);
    assert_eq!(manifest[1].frame_id, 40);
    for entry in &manifest {
        for file in entry.files.values() {
            let path = out_dir.join(file);
            assert!(path.exists(), "missing {}", path.display());
        }
        // Raw and enhanced frames pair up at identical geometry.
        let frame = image::open(out_dir.join(&entry.files["frame"])).unwrap();
        let enhanced = image::open(out_dir.join(&entry.files["enhanced_frame"])).unwrap();
        assert_eq!(frame.width(), 64);
        assert_eq!(frame.height(), 36);
        assert_eq!(enhanced.width(), 64);
        assert_eq!(enhanced.height(), 36);
        let world: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join(&entry.files["world_status"])).unwrap())
                .unwrap();
        assert_eq!(world["tick"], entry.frame_id);
        assert_eq!(world["weather"], "clear_noon");
    }
}

fn hash_dir(dir: &Path) -> Vec<(String, [u8; 32])> {
    let mut entries: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|name| {
            let bytes = std::fs::read(dir.join(&name)).unwrap();
            (name, Sha256::digest(&bytes).into())
        })
        .collect()
}

#[test]
fn bin_capture_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = g2r()
            .args([
                "--set",
                "engine.width=64",
                "--set",
                "engine.height=36",
                "--set",
                "pipeline.ticks=20",
                "--set",
                "engine.seed=5",
                "--set",
                &format!("capture.out_dir={}", out_dir.display()),
                "--set",
                "capture.every_n=10",
                "capture",
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = hash_dir(&dir.path().join("a"));
    let b = hash_dir(&dir.path().join("b"));
    assert!(!a.is_empty());
    assert_eq!(a, b, "same seed must produce byte-identical datasets");
}

#[test]
fn bin_scenario_reports_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scene.yaml");
    std::fs::write(
        &scenario,
        "
name: crossing
duration_ticks: 30
ego: {x: -10.0, y: -2.0, throttle: 0.5}
actors:
  - class: pedestrian
    x: 5.0
    y: 4.0
    speed_mps: 1.0
",
    )
    .unwrap();
    let out = g2r()
        .args(["--set", "engine.width=64", "--set", "engine.height=36"])
        .args(["scenario", "--scenario", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["scenario"], "crossing");
    assert_eq!(report["duration_ticks"], 30);
    assert_eq!(report["ticks_run"], 30);
    assert_eq!(report["frames_enhanced"], 30);
    assert!(report["fired"].is_array());
}

#[test]
fn bin_scenario_with_bad_yaml_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scene.yaml");
    std::fs::write(&scenario, "name: x\n").unwrap();
    let out = g2r()
        .args(["scenario", "--scenario", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("duration_ticks"), "stderr: {err}");
}

#[test]
fn bin_bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    let out = g2r()
        .args([
            "--set",
            "engine.width=64",
            "--set",
            "engine.height=36",
            "--set",
            "eval.ticks=8",
            "--set",
            "eval.cost_ms=1",
        ])
        .args([
            "bench",
            "--matrix",
            "f32:0,f32:2",
            "--out-json",
            json_path.to_str().unwrap(),
            "--out-csv",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("workload "));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 2);
    assert_eq!(report["fingerprint"].as_str().unwrap().len(), 64);
    assert_eq!(report["cells"][0]["status"], "ok");
    assert_eq!(report["cells"][1]["skip"], 2);

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 3, "header plus two cells");
    assert!(csv.lines().next().unwrap().starts_with("precision,skip,"));
}

#[test]
fn bin_bench_rejects_bad_matrix() {
    let out = g2r().args(["bench", "--matrix", "f33:0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bin_eval_iou_on_directories() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred");
    let gt = dir.path().join("gt");
    std::fs::create_dir_all(&pred).unwrap();
    std::fs::create_dir_all(&gt).unwrap();
    for name in ["a.png", "b.png"] {
        let img = image::GrayImage::from_fn(8, 4, |x, y| image::Luma([((x + y) % 3) as u8]));
        img.save(pred.join(name)).unwrap();
        img.save(gt.join(name)).unwrap();
    }
    let out = g2r()
        .args([
            "eval-iou",
            pred.to_str().unwrap(),
            gt.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["pairs"], 2);
    assert_eq!(report["pixels"], 64);
    assert_eq!(report["mean_iou"], 1.0);
    assert_eq!(report["per_class"]["road"], 1.0);
}

#[test]
fn bin_eval_iou_rejects_class_values_out_of_range() {
    let dir = tempfile::tempdir().unwrap();
    let img = image::GrayImage::from_pixel(4, 4, image::Luma([200u8]));
    let path = dir.path().join("bad.png");
    img.save(&path).unwrap();
    let out = g2r()
        .args(["eval-iou", path.to_str().unwrap(), path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bin_eval_cosine_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = g2r_eval::FeatureSet::empty("a", 3).unwrap();
    a.push(&[1.0, 0.0, 0.0]).unwrap();
    a.push(&[0.0, 1.0, 0.0]).unwrap();
    let mut b = g2r_eval::FeatureSet::empty("b", 3).unwrap();
    b.push(&[1.0, 1.0, 0.0]).unwrap();
    let pa = dir.path().join("a.g2rf");
    let pb = dir.path().join("b.g2rf");
    g2r_eval::save_features(&a, &pa).unwrap();
    g2r_eval::save_features(&b, &pb).unwrap();
    let expected = g2r_eval::cosine_pairwise(&a, &b).unwrap();

    let out = g2r()
        .args(["eval-cosine", pa.to_str().unwrap(), pb.to_str().unwrap()])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["a"]["label"], "a");
    assert_eq!(report["b"]["rows"], 1);
    assert!((report["mean_cosine"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn bin_run_features_feed_eval_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let fa = dir.path().join("a.g2rf");
    let fb = dir.path().join("b.g2rf");
    for path in [&fa, &fb] {
        let out = small(g2r().arg("run"))
            .args(["--set", "engine.seed=3"])
            .args(["--features", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let out = g2r()
        .args(["eval-cosine", fa.to_str().unwrap(), fb.to_str().unwrap()])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["dim"], 192);
    assert_eq!(report["a"]["rows"], 6);
    // Identical runs produce identical features.
    assert!((report["mean_cosine"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn bin_stats_match_flow_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("ref.json");
    let out = small(g2r().arg("run"))
        .args(["--emit-color-stats", stats.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = small(g2r().arg("run"))
        .args([
            "--set",
            "enhancer.kind=stats_match",
            "--set",
            &format!("enhancer.stats_path={}", stats.display()),
        ])
        .arg("--emit-stats")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["frames_enhanced"], 6);
}

#[test]
fn bin_external_enhancer_over_tcp() {
    use g2r_enhance::{serve_peer, IdentityEnhancer};
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let peer = std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let (mut tx, mut rx) = g2r_wire::tcp_split(stream).unwrap();
        let mut enhancer = IdentityEnhancer;
        let _ = serve_peer(&mut rx, &mut tx, &mut enhancer);
    });
    let out = small(g2r().arg("run"))
        .args([
            "--set",
            "enhancer.kind=external",
            "--set",
            &format!("enhancer.endpoint={addr}"),
        ])
        .arg("--emit-stats")
        .output()
        .unwrap();
    let stats = stdout_json(&out);
    assert_eq!(stats["frames_enhanced"], 6);
    peer.join().unwrap();
}

#[test]
fn bin_external_enhancer_unreachable_is_runtime_error() {
    let out = small(g2r().arg("run"))
        .args([
            "--set",
            "enhancer.kind=external",
            "--set",
            "enhancer.endpoint=127.0.0.1:1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bin_protocol_dump_logs_both_directions() {
    let out = g2r()
        .args(["--set", "engine.width=32", "--set", "engine.height=32"])
        .args(["protocol-dump", "--ticks", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("-> hello subscribe"));
    assert!(text.contains("<- hello stream_info 32x32"));
    assert!(text.contains("-> tick_request #1"));
    assert!(text.contains("<- sensor rgb #1"));
    assert!(text.contains("<- sensor gbuffer:custom_stencil #1"));
    assert!(text.contains("<- tick_ack #1"));
    assert!(text.contains("-> bye"));
    // Every logged frame opens with the wire magic.
    let magic_lines = text.lines().filter(|l| l.contains("4732524c")).count();
    assert!(magic_lines >= 14, "got {magic_lines}:\n{text}");
}

#[test]
fn bin_exit_codes_cover_the_documented_table() {
    // 0: success.
    let out = small(g2r().arg("run")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    // 2: usage (unknown subcommand, handled by the parser).
    let out = g2r().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // 3: config.
    let out = g2r()
        .args(["--set", "engine.mode=async", "run"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // 4: input file.
    let out = g2r()
        .args(["--config", "/nonexistent.yaml", "run"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bin_json_errors_are_structured() {
    let out = g2r()
        .args(["--json", "--set", "engine.mode=async", "run"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is json");
    assert_eq!(err["error"]["class"], "config");
    assert_eq!(err["error"]["code"], 3);
    assert!(err["error"]["issues"].is_array());
}

#[test]
fn bin_async_staleness_warning_lands_on_stderr() {
    let out = g2r()
        .args([
            "--set",
            "engine.mode=async",
            "--set",
            "pipeline.mode=async",
            "--set",
            "engine.width=64",
            "--set",
            "engine.height=36",
            "--set",
            "pipeline.ticks=50",
            "--set",
            "pipeline.max_staleness=0",
            "run",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    // A free-running engine virtually always outpaces the client at least
    // once in fifty frames; the warning text is the contract under test.
    let err = String::from_utf8_lossy(&out.stderr);
    if err.contains("warning:") {
        assert!(err.contains("max staleness"), "stderr: {err}");
    }
}
