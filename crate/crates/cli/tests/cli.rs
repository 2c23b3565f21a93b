use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use healthrec_core::evaluation::{ComparisonReport, ComparisonRow};
use healthrec_service::{HealthResponse, PredictResponse, RecommendResponse};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_healthrec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// A small synthetic dataset written into `dir`.
fn small_data(dir: &Path) -> PathBuf {
    let spec = dir.join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n_diseases": 5, "n_symptoms": 24, "symptoms_per_disease": 4, "p_present": 0.85,
            "p_noise": 0.03, "samples_per_disease": 30, "seed": 9}"#,
    )
    .unwrap();
    let csv = dir.join("data.csv");
    let o = run(&["synth", "--spec", s(&spec), "--out", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    csv
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_writes_csv_and_truth_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bundled.csv");
    let spec = data_dir().join("synthetic_spec.json");
    let o = run(&["synth", "--spec", s(&spec), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 4800 + 1);
    assert!(text.lines().next().unwrap().ends_with(",prognosis"));
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bundled.truth.json")).unwrap()).unwrap();
    assert_eq!(truth["class_names"].as_array().unwrap().len(), 40);
    assert_eq!(truth["spec"]["seed"], 42);
}

#[test]
fn train_midpoint_gbm_and_strict_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let out = dir.path().join("gbm.json");
    let midpoints = r#"{"n_estimators": 300, "learning_rate": 0.055, "max_depth": 5,
        "min_samples_split": 6, "min_samples_leaf": 3, "subsample": 0.75}"#;
    let o = run(&[
        "train", "--data", s(&data), "--model", "gbm", "--params", midpoints, "--out", s(&out),
        "--strict-params", "--seed", "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = stdout(&o);
    assert!(summary.contains("150 samples") && summary.contains("5 classes"), "{summary}");
    assert!(out.exists());

    let o = run(&[
        "train", "--data", s(&data), "--model", "gbm", "--params", r#"{"learning_rate": 0.3}"#, "--out",
        s(&out), "--strict-params",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("0.01 - 0.1"), "{}", stderr(&o));
}

#[test]
fn train_is_reproducible_and_params_may_be_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let params = dir.path().join("params.json");
    std::fs::write(&params, r#"{"n_trees": 10}"#).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&["train", "--data", s(&data), "--model", "rf", "--params", s(&params), "--out", s(out), "--seed", "4"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn io_and_validation_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = dir.path().join("m.json");
    let o = run(&["train", "--data", s(&missing), "--model", "nb", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let data = small_data(dir.path());
    let o = run(&["train", "--data", s(&data), "--model", "xgboost", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["train", "--data", s(&data), "--model", "nb", "--out", s(&out), "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["train", "--data", s(&data), "--model", "nb", "--params", "{not json", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["train", "--data", s(&data), "--model", "nb", "--out", s(&dir.path().join("no/such/dir/m.json"))]);
    assert_eq!(o.status.code(), Some(1));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,prognosis\n1,2,X\n").unwrap();
    let o = run(&["train", "--data", s(&bad), "--model", "nb", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 1"), "{}", stderr(&o));
}

#[test]
fn compare_single_model_and_bad_names() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let out = dir.path().join("report.json");
    let chart = dir.path().join("chart.csv");
    let o = run(&[
        "compare", "--data", s(&data), "--models", "nb", "--folds", "3", "--seed", "2", "--out", s(&out), "--chart",
        s(&chart),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2, "{}", stdout(&o));
    let report: ComparisonReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0].fold_acc.len(), 3);
    let chart = std::fs::read_to_string(&chart).unwrap();
    assert!(chart.lines().nth(1).unwrap().ends_with(",0.92"));

    let o = run(&["compare", "--data", s(&data), "--models", "nb,lasso"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lasso"));
}

#[test]
fn evaluate_emits_comparison_row_schema() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_data(dir.path());
    let model = dir.path().join("knn.json");
    let o = run(&["train", "--data", s(&data), "--model", "knn", "--params", r#"{"k": 3}"#, "--out", s(&model)]);
    assert!(o.status.success());

    let o = run(&["evaluate", "--data", s(&data), "--model", s(&model), "--folds", "5", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let row: ComparisonRow = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(row.fold_acc.len(), 5);
    assert_eq!(row.params["k"], 3);

    let report_path = dir.path().join("r.json");
    let o = run(&["compare", "--data", s(&data), "--models", "knn", "--params", r#"{"knn": {"k": 3}}"#, "--folds", "5",
        "--seed", "1", "--out", s(&report_path)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let eval: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "evaluate", "--data", s(&data), "--model", s(&model), "--folds", "5", "--seed", "1",
    ])))
    .unwrap();
    let keys = |v: &serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&report["rows"][0]), keys(&eval));
    assert_eq!(report["rows"][0]["mean_acc"], eval["mean_acc"]);

    let o = run(&["evaluate", "--data", s(&data), "--model", s(&model)]);
    let row: ComparisonRow = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(row.fold_acc.len(), 1);
}

#[test]
fn predict_text_json_and_unknown() {
    let model = data_dir().join("models/nb.json");
    let o = run(&["predict", "--model", s(&model), "--symptoms", "itching,skin_rash", "--top-k", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    let probs: Vec<f64> = text
        .lines()
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect();
    assert!(probs.windows(2).all(|w| w[0] >= w[1]));

    let o = run(&["predict", "--model", s(&model), "--symptoms", "itching,skin_rash", "--top-k", "3", "--json"]);
    let parsed: PredictResponse = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(parsed.predictions.len(), 3);
    assert!(parsed.unknown_ignored.is_none());

    let kb = data_dir().join("kb");
    let o = run(&["predict", "--model", s(&model), "--symptoms", "itching", "--top-k", "2", "--kb", s(&kb), "--json"]);
    let parsed: RecommendResponse = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(parsed.results.len(), 2);
    assert!(parsed.results.iter().all(|b| !b.kb_missing && !b.precautions.is_empty()));

    let o = run(&["predict", "--model", s(&model), "--symptoms", "itching,notasymptom"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("notasymptom"));
}

/// Bundled config with the port overridden from the environment.
#[test]
fn serve_bundled_config_answers_health() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = bin()
        .args(["serve", "--config", s(&data_dir().join("service.json"))])
        .env("HEALTHREC_PORT", port.to_string())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let url = format!("http://127.0.0.1:{port}/api/health");
    let started = Instant::now();
    let health = loop {
        if let Ok(resp) = rt.block_on(reqwest::get(&url)) {
            break rt.block_on(resp.json::<HealthResponse>()).unwrap();
        }
        if started.elapsed() > Duration::from_secs(30) || child.try_wait().unwrap().is_some() {
            let _ = child.kill();
            let mut err = String::new();
            child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
            panic!("service did not come up: {err}");
        }
        std::thread::sleep(Duration::from_millis(50));
    };
    let _ = child.kill();
    let _ = child.wait();
    assert_eq!(health.status, "ok");
    assert_eq!(health.class_count, 40);
    assert_eq!(health.vocab_size, 130);
}
