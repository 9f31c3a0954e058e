use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use boostlens::cli::run;
use boostlens::formats::ModelFile;
use boostlens::manifest::{Manifest, MANIFEST_FILE};
use boostlens::table::{load_csv, read_features, read_survey};
use boostlens_core::dataset::{RuleId, SurveySchema, SynthConfig};
use boostlens_core::evalx::TrainedModel;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boostlens"))
}

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("boostlens").chain(args.iter().copied()).map(String::from).collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small synthesis config so whole pipelines run in a second or two.
fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("synth.json");
    let cfg = SynthConfig { rows: 300, ..SynthConfig::table2() };
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    path
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn missing_input_exits_3_and_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("missing.csv");
    let out = bin()
        .args(["train", "--input", s(&missing), "--out", s(&tmp.path().join("o"))])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let o = tmp.path().join("o");
    assert_eq!(run(argv(&["train", "--out", s(&o)])), 2);
    assert_eq!(run(argv(&["frobnicate"])), 2);
    assert_eq!(run(argv(&["pipeline", "--out", s(&o), "--threshold", "1.5"])), 2);
    assert_eq!(run(argv(&["pipeline", "--out", s(&o), "--folds", "1"])), 2);
    assert_eq!(run(argv(&["--help"])), 0);
}

#[test]
fn explaining_a_baseline_exits_4() {
    let tmp = TempDir::new().unwrap();
    let o = tmp.path().join("o");
    let cfg = small_config(tmp.path());
    assert_eq!(run(argv(&["synth", "--out", s(&o), "--synth-config", s(&cfg)])), 0);
    assert_eq!(run(argv(&["clean", "--out", s(&o), "--input", s(&o.join("survey.csv"))])), 0);
    let features = o.join("features.csv");
    assert_eq!(run(argv(&["train", "--out", s(&o), "--input", s(&features), "--kind", "logistic"])), 0);
    let code = run(argv(&["explain", "--out", s(&o), "--input", s(&features), "--model", s(&o.join("model.json"))]));
    assert_eq!(code, 4);
}

#[test]
fn pipeline_matches_individual_stages() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let common = |o: &Path| vec!["--out".to_string(), s(o).to_string(), "--seed".into(), "7".into()];
    let go = |cmd: &str, o: &Path, extra: &[&str]| {
        let mut args = vec![cmd.to_string()];
        args.extend(common(o));
        args.extend(extra.iter().map(|x| x.to_string()));
        assert_eq!(run(std::iter::once("boostlens".to_string()).chain(args)), 0, "{cmd}");
    };
    go("pipeline", &a, &["--synth-config", s(&cfg), "--folds", "3", "--interactions"]);

    let p = |name: &str| b.join(name);
    go("synth", &b, &["--synth-config", s(&cfg)]);
    go("clean", &b, &["--input", s(&p("survey.csv"))]);
    go("train", &b, &["--input", s(&p("features.csv")), "--folds", "3"]);
    go("eval", &b, &["--input", s(&p("features.csv")), "--model", s(&p("model.json")), "--folds", "3"]);
    go("explain", &b, &["--input", s(&p("features.csv")), "--model", s(&p("model.json")), "--interactions"]);
    go("report", &b, &["--input", s(&p("explanations.json"))]);
    go("compare", &b, &["--input", s(&p("features.csv")), "--folds", "3"]);

    let (fa, fb) = (files(&a), files(&b));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, fb.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>());
    for ((name, x), (_, y)) in fa.iter().zip(&fb) {
        assert!(x == y, "{name} differs");
    }
    for want in ["manifest.json", "model.json", "cv.json", "explanations.json", "run.importance.csv", "run.effects.json", "comparison.csv"] {
        assert!(names.contains(&want), "{want} missing");
    }
}

#[test]
fn manifest_covers_and_validates_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let o = tmp.path().join("o");
    assert_eq!(run(argv(&["pipeline", "--out", s(&o), "--seed", "3", "--synth-config", s(&cfg), "--folds", "3"])), 0);
    let manifest: Manifest = serde_json::from_slice(&fs::read(o.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert!(manifest.verify(&o).is_empty());
    let recorded: Vec<String> = manifest
        .stages
        .values()
        .flat_map(|st| st.artifacts.iter().map(|a| a.path.clone()))
        .collect();
    for (name, _) in files(&o) {
        assert!(name == MANIFEST_FILE || recorded.contains(&name), "{name} not in manifest");
    }
    assert!(manifest.stages.values().all(|st| st.seed == 3));
    assert!(manifest.stages["eval"].sub_seeds.contains_key("folds"));

    fs::write(o.join("model.json"), b"{}").unwrap();
    assert_eq!(manifest.verify(&o), ["model.json"]);
}

#[test]
fn saved_models_predict_bit_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let o = tmp.path().join("o");
    assert_eq!(run(argv(&["synth", "--out", s(&o), "--synth-config", s(&cfg)])), 0);
    assert_eq!(run(argv(&["clean", "--out", s(&o), "--input", s(&o.join("survey.csv"))])), 0);
    let (x, y) = read_features(&o.join("features.csv")).unwrap();
    for kind in ["gbt", "logistic", "cart"] {
        assert_eq!(run(argv(&["train", "--out", s(&o), "--input", s(&o.join("features.csv")), "--kind", kind])), 0);
        let file = ModelFile::load(&o.join("model.json")).unwrap();
        let fresh = file.spec.fit(&x, &y).unwrap();
        assert_eq!(file.model.kind(), fresh.kind());
        for row in x.rows() {
            let (a, b) = (file.model.predict_proba(row).unwrap(), fresh.predict_proba(row).unwrap());
            assert_eq!(a.to_bits(), b.to_bits(), "{kind}");
        }
        if let TrainedModel::Gbt(e) = &file.model {
            assert_eq!(e.trees.len(), 60);
        }
    }
}

fn header() -> String {
    SurveySchema::table2().names().join(",")
}

fn good_row() -> Vec<&'static str> {
    vec![
        "Female", "25-34", "Bachelor's degree", "Yes", "10", "5", "5", "4", "No", "3", "Yes", "3",
        "6", "No", "No", "No", "Yes", "4", "5", "5", "3", "2", "2", "6",
    ]
}

#[test]
fn survey_reader_cases() {
    let schema = SurveySchema::table2();
    let path = Path::new("inline.csv");
    let mut bad_years = good_row();
    bad_years[4] = "abc";
    let short = &good_row()[..20];
    let text = format!(
        "{}\n{}\n{}\n{}\n",
        header(),
        good_row().join(","),
        bad_years.join(","),
        short.join(",")
    );
    let ds = read_survey(text.as_bytes(), path, &schema).unwrap();
    assert_eq!(ds.records.len(), 2);
    assert_eq!(ds.records[1].values[4], "abc");
    assert_eq!(ds.rejection_log.len(), 1);
    assert_eq!((ds.rejection_log[0].index, ds.rejection_log[0].rule), (2, RuleId::Malformed));
    let screened = boostlens_core::dataset::screen_invalid(&ds, &Default::default());
    assert_eq!(screened.records.len(), 1);
    assert!(screened.rejection_log.iter().any(|r| r.index == 1 && r.rule == RuleId::InvalidValue));

    let no_trust = header().replace(",Trust", "");
    assert!(read_survey(format!("{no_trust}\n").as_bytes(), path, &schema).is_err());
    let dup = header().replace("Risk", "Benefit");
    assert!(read_survey(format!("{dup}\n").as_bytes(), path, &schema).is_err());

    let err = load_csv(Path::new("/nonexistent/survey.csv"), &schema).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn completion_time_column_is_optional_and_screened() {
    let schema = SurveySchema::table2();
    let text = format!(
        "{},completion_seconds\n{},30\n{},300\n{},soon\n",
        header(),
        good_row().join(","),
        good_row().join(","),
        good_row().join(",")
    );
    let ds = read_survey(text.as_bytes(), Path::new("t.csv"), &schema).unwrap();
    assert_eq!(ds.records.len(), 2);
    assert_eq!(ds.rejection_log[0].rule, RuleId::Malformed);
    let screened = boostlens_core::dataset::screen_invalid(&ds, &Default::default());
    assert_eq!(screened.records.len(), 1);
    assert_eq!(screened.records[0].completion_seconds, Some(300.0));
}
