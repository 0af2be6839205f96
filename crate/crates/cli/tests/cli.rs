use std::path::Path;
use std::process::Command;

use zenoprep::config::RunConfig;
use zenoprep::pipeline::Pipeline;
use zenoprep::plot::{emit_plot_data, SUMMARY_FILE};
use zenoprep::report::Report;
use zenoprep::{EXIT_CAPACITY, EXIT_CONFIG, EXIT_DEGENERATE};
use zenoprep_core::cost::CostModel;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_zenoprep"));
    c.env_remove("ZENOPREP_CACHE_DIR").env("RUST_LOG", "error");
    c
}

fn small_config(m: usize, cache: &Path) -> RunConfig {
    let mut cfg = RunConfig::new(m, 1);
    cfg.cache_dir = Some(cache.to_path_buf());
    cfg
}

#[test]
fn two_site_report_has_analytic_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = bin()
        .args(["schedule", "--m", "2", "--k", "1", "--u", "4", "--doping", "0", "--no-cache", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let r = Report::load(&out).unwrap();
    let rewind = r.model(CostModel::Rewind).unwrap();
    let last = rewind.schedule.last().unwrap();
    assert_eq!(last.s, 1.0);
    assert!((last.gap - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-9);
    assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
}

#[test]
fn invalid_lattice_fails_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = bin()
        .args(["schedule", "--m", "1", "--k", "2", "--cache-dir"])
        .arg(dir.path().join("cache"))
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(!out.exists());
    assert!(!dir.path().join("cache").exists());
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"schema_version": 1, "lattice": {"m": 2, "k": 1}, "lattise": 3}"#).unwrap();
    let o = bin().args(["schedule", "--no-cache", "-c"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn capacity_error_exit_code() {
    let o = bin()
        .args(["spectrum", "--m", "8", "--k", "1", "--max-dim", "100", "--s", "0.5", "--no-cache"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_CAPACITY), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn degenerate_ground_state_exit_code() {
    // two spinless fermions on a square: the free ground level is twofold degenerate
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "lattice": {"m": 2, "k": 2}, "sector": {"n_up": 2, "n_down": 0}}"#,
    )
    .unwrap();
    let o = bin()
        .args(["spectrum", "--s", "0", "--no-cache", "-c"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_DEGENERATE), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("r.json");
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let status = bin()
            .args(["schedule", "--m", "3", "--trials", "2000", "--seed", "7", "--cache-dir"])
            .arg(&cache)
            .arg("-o")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        let mut r = Report::load(&out).unwrap();
        r.wall_seconds = 0.0;
        outputs.push(r.to_json());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn second_run_needs_no_eigensolves() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let first = Pipeline::new(small_config(4, &cache), true).unwrap();
    let a = first.run().unwrap();
    assert!(first.evaluator.solves() > 0);
    let second = Pipeline::new(small_config(4, &cache), true).unwrap();
    let b = second.run().unwrap();
    assert_eq!(second.evaluator.solves(), 0);
    assert_eq!(a.models, b.models);

    let mut tighter = small_config(4, &cache);
    tighter.spectral.tol = 1e-10;
    let third = Pipeline::new(tighter, true).unwrap();
    third.run().unwrap();
    assert!(third.evaluator.solves() >= first.evaluator.solves());
}

#[test]
fn single_report_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let r = Pipeline::new(small_config(3, &dir.path().join("cache")), false)
        .unwrap()
        .run()
        .unwrap();
    emit_plot_data(&[r], dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("n_sites,shape,"));
    assert!(lines[1].starts_with("3,chain,"));
    assert!(dir.path().join("schedule_3x1_rewind.csv").exists());
}

#[test]
fn scan_writes_reports_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["scan", "--m-list", "2,3,4", "--k", "1", "--no-cache", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let summary = std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(summary.lines().any(|l| l.starts_with("# fit shape=chain k=1 model=rewind")));
    let reports: Vec<_> = ["2x1", "3x1", "4x1"]
        .iter()
        .map(|l| dir.path().join(format!("report_{l}.json")))
        .collect();
    let again = dir.path().join("again");
    let status = bin()
        .arg("plot-data")
        .args(&reports)
        .arg("--out-dir")
        .arg(&again)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert_eq!(
        std::fs::read_to_string(again.join(SUMMARY_FILE)).unwrap(),
        summary
    );
}

#[test]
fn other_subcommands_run() {
    let ok = |args: &[&str]| {
        let o = bin().args(args).output().unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let v = ok(&["spectrum", "--m", "2", "--doping", "0", "--s", "1", "--no-cache"]);
    assert!((v["gap"].as_f64().unwrap() - 0.828_427_124_746_190_1).abs() < 1e-9);
    let v = ok(&["cost", "--m", "3", "--schedule", "0,0.5,1", "--no-cache"]);
    assert_eq!(v["costs"].as_array().unwrap().len(), 4);
    let v = ok(&["simulate", "--step", "0.5,1,1", "--trials", "20000"]);
    assert_eq!(v["chain"].as_f64().unwrap(), 3.0);
    let v = ok(&["simulate", "--m", "3", "--schedule", "0,0.5,1", "--exact", "--trials", "2000", "--no-cache"]);
    assert!((v["projective"]["final_fidelity_min"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let v = ok(&["tdepth", "--t", "100"]);
    assert_eq!(v[0]["t_depth"].as_f64().unwrap(), 1e7);
}
