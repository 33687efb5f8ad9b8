use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn leocell(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leocell"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("run leocell")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulated() -> (TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let o = leocell(dir.path(), &["simulate", "--default-grid"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let data = dir.path().join("dataset.csv").display().to_string();
    (dir, data)
}

#[test]
fn simulate_writes_the_canonical_grid_and_a_manifest() {
    let (dir, data) = simulated();
    let text = std::fs::read_to_string(&data).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("temperature_c,dod_pct,cycle,rc_pct,eodv_v"));
    assert_eq!(lines.count(), 156);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("simulate.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["seed"], 0);
}

#[test]
fn same_seed_same_noisy_dataset() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = leocell(dir.path(), &["--seed", seed, "simulate", "--noise", "0.5"]);
        assert!(o.status.success());
        std::fs::read_to_string(dir.path().join("dataset.csv")).unwrap()
    };
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
}

#[test]
fn fit_ols_prints_the_equation_and_saves_a_model() {
    let (dir, data) = simulated();
    let o = leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "rc"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("RC = 110.2900 - 0.7551*T - 0.2977*DOD - 0.0014*C"), "{out}");
    assert!(dir.path().join("rc_linear.model").exists());
}

#[test]
fn evaluate_linear_model_on_its_own_data() {
    let (dir, data) = simulated();
    leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "eodv"]);
    let model = dir.path().join("eodv_linear.model").display().to_string();
    let o = leocell(
        dir.path(),
        &["evaluate", "--model", &model, "--data", &data, "--ba-mode", "absolute"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let bias = report["bland_altman"]["value"]["bias"].as_f64().unwrap();
    assert!(bias.abs() < 1e-9);
    let ba = std::fs::read_to_string(dir.path().join("bland_altman.csv")).unwrap();
    assert!(ba.starts_with("mean,predicted_minus_observed\n"));
    assert!(dir.path().join("one_to_one.csv").exists());
}

#[test]
fn percent_mode_changes_the_bland_altman_header() {
    let (dir, data) = simulated();
    leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "rc"]);
    let model = dir.path().join("rc_linear.model").display().to_string();
    let o = leocell(
        dir.path(),
        &["evaluate", "--model", &model, "--data", &data, "--ba-mode", "percent", "--split", "even-odd"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let ba = std::fs::read_to_string(dir.path().join("bland_altman.csv")).unwrap();
    assert!(ba.starts_with("mean,predicted_minus_observed_pct\n"));
    assert_eq!(ba.lines().count(), 1 + 78);
}

#[test]
fn train_then_resume_then_predict() {
    let (dir, data) = simulated();
    let o = leocell(
        dir.path(),
        &["train", "--data", &data, "--target", "rc", "--error-target", "2"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let model = dir.path().join("rc_mlp.model").display().to_string();
    let o = leocell(
        dir.path(),
        &["train", "--data", &data, "--target", "rc", "--error-target", "1", "--resume", &model],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("train_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["final_train_mape_pct"].as_f64().unwrap() <= 1.0);
    let history = std::fs::read_to_string(dir.path().join("error_history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_mape_pct\n0,"));

    let o = leocell(dir.path(), &["predict", "--model", &model, "--sweep", "--default-grid"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let long = std::fs::read_to_string(dir.path().join("sweep_long.csv")).unwrap();
    assert_eq!(long.lines().count(), 1 + 156);
    assert!(dir.path().join("sweep_T10_DOD20.csv").exists());
}

#[test]
fn extrapolation_is_refused_unless_allowed() {
    let (dir, data) = simulated();
    leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "rc"]);
    let model = dir.path().join("rc_linear.model").display().to_string();
    let o = leocell(dir.path(), &["predict", "--model", &model, "--at", "10,10,30000"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cycle"), "{}", stderr(&o));

    let o = leocell(
        dir.path(),
        &["predict", "--model", &model, "--at", "10,10,30000", "--allow-extrapolation"],
    );
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn cycle_life_closed_form_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = leocell(dir.path(), &["cycle-life", "--temperature", "10", "--dod", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let result: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cycle_life.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(result["outcome"], "fails");
    assert_eq!(result["cycle"], 42688);
    assert_eq!(result["criterion"], "rc");
}

#[test]
fn cycle_life_scan_with_linear_models_matches_closed_form() {
    let (dir, data) = simulated();
    leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "rc"]);
    leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "eodv"]);
    let rc = dir.path().join("rc_linear.model").display().to_string();
    let eodv = dir.path().join("eodv_linear.model").display().to_string();
    let o = leocell(
        dir.path(),
        &[
            "cycle-life", "--temperature", "10", "--dod", "10", "--horizon", "100000",
            "--rc-model", &rc, "--eodv-model", &eodv,
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let result: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("cycle_life.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(result["cycle"], 42688);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small grid\nsettings = 20:20\ncycle_end = 2000\nseed = 3\n").unwrap();
    let cfg = cfg.display().to_string();
    let o = leocell(dir.path(), &["--config", &cfg, "simulate", "--cycle-step", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("dataset.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("simulate.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["plan"]["cycle_step"], 500);
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "noise_sd = 1\n").unwrap();
    let o = leocell(dir.path(), &["--config", cfg.to_str().unwrap(), "simulate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("noise_sd"));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(leocell(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        leocell(dir.path(), &["fit-ols", "--data", "x.csv", "--target", "soc"]).status.code(),
        Some(1)
    );
    assert_eq!(leocell(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn rank_deficient_fit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = leocell(
        dir.path(),
        &["simulate", "--setting", "10:10", "--setting", "20:20", "--setting", "30:30"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let data = dir.path().join("dataset.csv").display().to_string();
    let o = leocell(dir.path(), &["fit-ols", "--data", &data, "--target", "rc"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("dod_pct"), "{}", stderr(&o));
}

#[test]
fn huge_learning_rate_never_crashes() {
    let (dir, data) = simulated();
    let o = leocell(
        dir.path(),
        &["train", "--data", &data, "--target", "rc", "--learning-rate", "1e308", "--max-epochs", "5"],
    );
    // Huge steps saturate the sigmoids rather than overflow on some seeds;
    // either a clean stop or a numeric failure is acceptable, never a crash.
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
}
