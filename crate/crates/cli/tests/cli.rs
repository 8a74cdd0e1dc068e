use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn quick_train(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.join("m.vqc");
    let mut args = vec![
        "train", "--synth", "blobs", "--synth-n", "8", "--synth-dim", "4", "--layers", "2", "--epochs", "12", "--lr",
        "0.05", "--out", p(&out),
    ];
    args.extend_from_slice(extra);
    vqc(&args)
}

#[test]
fn train_writes_model_and_reports_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let o = quick_train(dir.path(), &["--log", p(&log)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("final accuracy: train"), "{text}");
    assert!(text.contains("epoch   10"), "{text}");
    assert!(text.contains("epoch   12"), "{text}");
    assert!(text.contains("reporting on the training set"));
    let model = fs::read_to_string(dir.path().join("m.vqc")).unwrap();
    assert!(model.starts_with("vqc-model 1"));
    assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 12);
}

#[test]
fn training_is_reproducible_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = quick_train(a.path(), &["--seed", "3", "--threads", "1"]);
    let ob = quick_train(b.path(), &["--seed", "3", "--threads", "3"]);
    assert!(oa.status.success() && ob.status.success());
    let strip = |s: String| s.lines().filter(|l| !l.starts_with("model written")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(stdout(&oa)), strip(stdout(&ob)));
    assert_eq!(
        fs::read(a.path().join("m.vqc")).unwrap(),
        fs::read(b.path().join("m.vqc")).unwrap()
    );
}

#[test]
fn negative_margin_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_train(dir.path(), &["--margin", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "), "{}", stderr(&o));
    assert!(stderr(&o).contains("margin"));
    assert!(!dir.path().join("m.vqc").exists());
}

#[test]
fn bad_flag_values_fail_before_work() {
    let dir = tempfile::tempdir().unwrap();
    for extra in [
        &["--class-weights", "1,1,1"][..],
        &["--class-weights", "1,1,0,1"],
        &["--lr", "0"],
        &["--batch-size", "0"],
        &["--optimizer", "rmsprop"],
        &["--scheme", "basis"],
        &["--layers", "0"],
        &["--patience", "0"],
        &["--qubits", "1"],
    ] {
        let mut args = vec!["train", "--synth", "blobs", "--synth-dim", "4", "--out", "m.vqc"];
        args.extend_from_slice(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_vqc")).args(&args).current_dir(dir.path()).output().unwrap();
        assert_eq!(o.status.code(), Some(1), "{extra:?}: {}", stderr(&o));
        assert!(!stdout(&o).contains("epoch"), "{extra:?}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(vqc(&["train", "--out", "x"]).status.code(), Some(2));
    assert_eq!(vqc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(vqc(&["eval", "--model", "m"]).status.code(), Some(2));
}

#[test]
fn missing_input_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let o = vqc(&["train", "--train", p(&missing), "--out", p(&dir.path().join("m.vqc"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("absent.csv"), "{}", stderr(&o));
}

#[test]
fn malformed_csv_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    fs::write(&csv, "f0,f1,label\n1.0,2.0,none\n1.0,oops,both\n").unwrap();
    let o = vqc(&["train", "--train", p(&csv), "--out", p(&dir.path().join("m.vqc"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 3") && err.contains("f1"), "{err}");
}

#[test]
fn synth_eval_and_predict_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    let o = vqc(&["synth", "--n-per-class", "5", "--dim", "4", "--seed", "2", "--out", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 21);

    assert!(quick_train(dir.path(), &[]).status.success());
    let model = dir.path().join("m.vqc");

    let json = dir.path().join("e.json");
    let o = vqc(&["eval", "--model", p(&model), "--data", p(&data), "--json", p(&json)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("macro"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["n_samples"], 20);
    assert_eq!(report["confusion"].as_array().unwrap().len(), 4);

    let preds = dir.path().join("p.csv");
    let o = vqc(&["predict", "--model", p(&model), "--data", p(&data), "--out", p(&preds)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&preds).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "prediction,none,infection,ischaemia,both");
    assert_eq!(lines.len(), 21);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        let scores: Vec<f64> = fields[1..].iter().map(|f| f.parse().unwrap()).collect();
        assert!(scores.iter().all(|s| (-1.0..=1.0).contains(s)));
    }

    // unlabeled input is accepted by predict, and stdout matches the file
    let unlabeled = dir.path().join("u.csv");
    let stripped: String = fs::read_to_string(&data)
        .unwrap()
        .lines()
        .map(|l| format!("{}\n", &l[..l.rfind(',').unwrap()]))
        .collect();
    fs::write(&unlabeled, stripped).unwrap();
    let o = vqc(&["predict", "--model", p(&model), "--data", p(&unlabeled)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), text);
}

#[test]
fn dimension_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_train(dir.path(), &[]).status.success());
    let data = dir.path().join("wide.csv");
    assert!(vqc(&["synth", "--n-per-class", "2", "--dim", "6", "--out", p(&data)]).status.success());
    let model = dir.path().join("m.vqc");
    let json = dir.path().join("e.json");
    let o = vqc(&["eval", "--model", p(&model), "--data", p(&data), "--json", p(&json)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("6 features"), "{}", stderr(&o));
    assert!(!json.exists());
    let preds = dir.path().join("p.csv");
    let o = vqc(&["predict", "--model", p(&model), "--data", p(&data), "--out", p(&preds)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!preds.exists());
}

#[test]
fn corrupt_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.vqc");
    fs::write(&model, "vqc-model 9\n").unwrap();
    let data = dir.path().join("d.csv");
    assert!(vqc(&["synth", "--n-per-class", "2", "--dim", "4", "--out", p(&data)]).status.success());
    let o = vqc(&["eval", "--model", p(&model), "--data", p(&data)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("version"), "{}", stderr(&o));
}

#[test]
fn gradcheck_passes_and_is_deterministic() {
    let a = vqc(&["gradcheck", "--trials", "3", "--qubits", "3", "--seed", "5"]);
    let b = vqc(&["gradcheck", "--trials", "3", "--qubits", "3", "--seed", "5"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(stdout(&a).contains("PASS"));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn gradcheck_rejects_zero_trials() {
    let o = vqc(&["gradcheck", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trials"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("train.toml");
    fs::write(&cfg, "epochs = 3\nlearning_rate = 0.2\noptimizer = \"sgd\"\nseed = 11\n").unwrap();
    let out = dir.path().join("m.vqc");
    let o = vqc(&[
        "train", "--synth", "blobs", "--synth-n", "4", "--synth-dim", "4", "--layers", "1", "--config", p(&cfg),
        "--optimizer", "momentum", "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("epochs:         3"), "{text}");
    assert!(text.contains("learning rate:  0.2"), "{text}");
    assert!(text.contains("optimizer:      sgd_momentum"), "{text}");
    assert!(text.contains("seed:           11"), "{text}");
    assert!(text.contains("epoch    3"), "{text}");

    fs::write(&cfg, "epochs = 3\nlearnin_rate = 0.2\n").unwrap();
    let o = vqc(&["train", "--synth", "blobs", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("train.toml"), "{}", stderr(&o));
}

#[test]
fn early_stopping_flags_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_train(dir.path(), &["--patience", "2", "--min-delta", "0.001"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("early stopping: patience 2, min_delta 0.001"));
}
