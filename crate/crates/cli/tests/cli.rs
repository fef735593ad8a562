//! End-to-end checks of the binary: flags, exit codes, manifests, and the
//! accent stream contract.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accentor"))
}

fn write_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("corpus.txt");
    let mut lines = String::new();
    for _ in 0..40 {
        lines.push_str("те облака́ плыли́\n");
        lines.push_str("э́ти слова́ звуча́т\n");
        lines.push_str("ма́ло сло́ва на́до\n");
        lines.push_str("# комментарий\n\n");
        lines.push_str("он узна́ет её до́м\n");
    }
    fs::write(&path, lines).unwrap();
    path
}

fn write_dictionary(dir: &Path) -> PathBuf {
    let path = dir.join("dict.txt");
    fs::write(
        &path,
        "слово\tсло́во слова́ сло́ва\nоблако\tо́блако облака́\nрука\tрука́ ру́ки руки́\nдом\tдо́м\n",
    )
    .unwrap();
    path
}

fn train_model(dir: &Path, mode: &str, seed: &str) -> PathBuf {
    let corpus = write_corpus(dir);
    let model = dir.join(format!("{mode}-{seed}.accm"));
    let out = bin()
        .args([
            "train",
            "--mode",
            mode,
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
            "--seed",
            seed,
            "--epochs",
            "3",
            "--hidden",
            "8",
            "--batch",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    model
}

fn run_accent(model: &Path, input: &str, extra: &[&str]) -> Output {
    let mut child = bin()
        .args(["accent", "--model", model.to_str().unwrap()])
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn accent_output_stripped_of_marks_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let model = train_model(dir.path(), "cdm", "5");
    // mixed case, double spaces, punctuation, Latin, digits, no final newline
    let input = "Те облака,  плыли! over Москву 42\nвторая строка\u{0301} без конца";
    let out = run_accent(&model, input, &[]);
    assert!(out.status.success());
    let accented = String::from_utf8(out.stdout).unwrap();
    let stripped: String = accented.chars().filter(|&c| c != '\u{0301}').collect();
    let input_stripped: String = input.chars().filter(|&c| c != '\u{0301}').collect();
    assert_eq!(stripped, input_stripped);
}

#[test]
fn accent_applies_yo_rule_and_monosyllable_shortcut() {
    let dir = TempDir::new().unwrap();
    let model = train_model(dir.path(), "cfm", "6");
    let out = run_accent(&model, "ёж дом\n", &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "ё\u{0301}ж до\u{0301}м\n");
    // with the rules off the model takes over; both words are still marked
    // somewhere legal or left alone, but never corrupted
    let out = run_accent(&model, "ёж дом\n", &["--yo-rule", "off", "--mono", "off"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let stripped: String = text.chars().filter(|&c| c != '\u{0301}').collect();
    assert_eq!(stripped, "ёж дом\n");
}

#[test]
fn accent_passes_vowelless_tokens_through() {
    let dir = TempDir::new().unwrap();
    let model = train_model(dir.path(), "cfm", "7");
    let out = run_accent(&model, "в с к\n", &[]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "в с к\n");
}

#[test]
fn conflicting_mode_and_source_flags_exit_one() {
    let dir = TempDir::new().unwrap();
    let corpus = write_corpus(dir.path());
    let out = bin()
        .args([
            "train",
            "--mode",
            "dict",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            dir.path().join("m.accm").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--mode dict") && err.contains("--corpus"), "{err}");
}

#[test]
fn wrong_format_data_exits_one() {
    let dir = TempDir::new().unwrap();
    let corpus = write_corpus(dir.path());
    // a corpus file offered as a dictionary has no TAB-separated forms
    let out = bin()
        .args([
            "train",
            "--mode",
            "dict",
            "--dict",
            corpus.to_str().unwrap(),
            "--out",
            dir.path().join("m.accm").to_str().unwrap(),
            "--strict",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_one() {
    let out = bin().args(["train", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gradcheck_corruption_hook_exits_three_naming_the_block() {
    let out = bin()
        .args([
            "gradcheck",
            "--hidden",
            "4",
            "--maxlen",
            "8",
            "--instances",
            "2",
            "--corrupt-block",
            "dense_W",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dense_W"));
}

#[test]
fn gradcheck_impossible_tolerance_exits_three() {
    let out = bin()
        .args([
            "gradcheck", "--hidden", "4", "--maxlen", "8", "--instances", "2", "--tolerance",
            "1e-14",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reproducible_training_yields_identical_manifest_digests() {
    let dir = TempDir::new().unwrap();
    let corpus = write_corpus(dir.path());
    // identical flags both times; only the rerun differs
    let digest_of = |run: &str| {
        let model = dir.path().join("model.accm");
        let manifest = dir.path().join(format!("{run}.manifest.json"));
        let out = bin()
            .args([
                "train",
                "--mode",
                "cdm",
                "--corpus",
                corpus.to_str().unwrap(),
                "--out",
                model.to_str().unwrap(),
                "--seed",
                "11",
                "--epochs",
                "2",
                "--hidden",
                "8",
                "--manifest",
                manifest.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
        json["digest"].as_str().unwrap().to_string()
    };
    assert_eq!(digest_of("a"), digest_of("b"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"hidden": 4, "maxlen": 8, "instances": 2, "tolerance": 1e-14}"#,
    )
    .unwrap();
    // config tolerance is unreachable: exit 3
    let out = bin()
        .args(["gradcheck", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // explicit flag overrides the config: exit 0
    let out = bin()
        .args([
            "gradcheck",
            "--config",
            config.to_str().unwrap(),
            "--tolerance",
            "1e-3",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    // unknown config keys are rejected
    fs::write(&config, r#"{"no-such-setting": 1}"#).unwrap();
    let out = bin()
        .args(["gradcheck", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_writes_tsv_and_json_reports() {
    let dir = TempDir::new().unwrap();
    let model = train_model(dir.path(), "cfm", "9");
    let corpus = dir.path().join("corpus.txt");
    let report = dir.path().join("report");
    let out = bin()
        .args([
            "eval",
            "--model",
            model.to_str().unwrap(),
            "--data",
            corpus.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
            "--split",
            "test",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tsv = fs::read_to_string(dir.path().join("report.tsv")).unwrap();
    assert!(tsv.starts_with("syllables\t"));
    assert!(tsv.contains("micro-average"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(json["buckets"]["rows"].is_array());
    assert!(dir.path().join("report.manifest.json").exists());
}

#[test]
fn homographs_with_no_qualifying_pairs_exits_zero() {
    let dir = TempDir::new().unwrap();
    let model = train_model(dir.path(), "cfm", "10");
    let dict = write_dictionary(dir.path());
    let corpus = dir.path().join("corpus.txt");
    let out = bin()
        .args([
            "homographs",
            "--dict",
            dict.to_str().unwrap(),
            "--corpus",
            corpus.to_str().unwrap(),
            "--models",
            model.to_str().unwrap(),
            "--min-count",
            "100000",
            "--report",
            dir.path().join("homo").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no homograph pair"));
}

#[test]
fn homographs_scores_each_model() {
    let dir = TempDir::new().unwrap();
    let cfm = train_model(dir.path(), "cfm", "12");
    let cdm = train_model(dir.path(), "cdm", "13");
    let dict = write_dictionary(dir.path());
    let corpus = dir.path().join("corpus.txt");
    let out = bin()
        .args([
            "homographs",
            "--dict",
            dict.to_str().unwrap(),
            "--corpus",
            corpus.to_str().unwrap(),
            "--models",
            cfm.to_str().unwrap(),
            cdm.to_str().unwrap(),
            "--min-count",
            "2",
            "--split",
            "all",
            "--report",
            dir.path().join("homo").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // "слова" appears under both stresses in the corpus
    let tsv = fs::read_to_string(dir.path().join("homo.cfm-12.tsv")).unwrap();
    assert!(tsv.contains("слова"), "{tsv}");
    assert!(dir.path().join("homo.cdm-13.json").exists());
}

#[test]
fn eval_on_missing_model_exits_one() {
    let dir = TempDir::new().unwrap();
    let corpus = write_corpus(dir.path());
    let out = bin()
        .args([
            "eval",
            "--model",
            dir.path().join("absent.accm").to_str().unwrap(),
            "--data",
            corpus.to_str().unwrap(),
            "--report",
            dir.path().join("r").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
