use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn wsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn validate_exit_codes() {
    let ok = wsc(&["validate", &f("chsh_scenario.json")]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = wsc(&["validate", &f("closure_violation_scenario.json")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("closure violation"));
    let missing = wsc(&["validate", &f("no_such_file.json")]);
    assert_eq!(missing.status.code(), Some(2));
    let sid = wsc(&["validate", &f("sid_mark_schema.json")]);
    assert_eq!(sid.status.code(), Some(1));
    for good in [
        "quarter_box_model.json",
        "pr_box_model.json",
        "survey_model.json",
        "product_uniform_model.json",
        "councilmen_schema.json",
        "trophy_schema.json",
        "trophy_generalised_schema.json",
        "cannibal_schema.json",
    ] {
        assert_eq!(wsc(&["validate", &f(good)]).status.code(), Some(0), "{good}");
    }
    let r = wsc(&["validate", &f("responses_synthetic.csv"), "--schema", &f("cannibal_schema.json")]);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("410 responses, 348 valid"));
}

#[test]
fn validate_reports_malformed_response_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");
    std::fs::write(&p, "respondent_id,word1,word2,pick1,pick2\nr1,special,special,AA,AA\n").unwrap();
    let o = wsc(&["--format", "json", "validate", p.to_str().unwrap(), "--schema", &f("cannibal_schema.json")]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["valid"], false);
    assert!(v["problems"].to_string().contains("line 2: duplicate pick AA"));
}

#[test]
fn analyze_survey() {
    let o = wsc(&["--format", "json", "analyze", &f("survey_model.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["chsh"]["violation"].as_f64().unwrap() - 0.192).abs() < 2e-3);
    assert!((v["cnt1"].as_f64().unwrap() - 0.192).abs() < 2e-3);
    assert!((v["contextual_fraction"]["cf"].as_f64().unwrap() - 0.096).abs() < 1e-3);
    assert_eq!(v["verdicts"]["contextual_cbd"], true);
    assert_eq!(v["verdicts"]["contextual_sheaf"], true);
    assert_eq!(v["notices"].as_array().unwrap().len(), 4);

    let text = stdout(&wsc(&["analyze", &f("survey_model.json")]));
    assert!(text.contains("chsh violation: 0.192000"));
    assert!(text.contains("cnt1: 0.192000"));
    assert!(text.contains("contextual fraction: 0.096000"));
}

#[test]
fn analyze_pr_and_uniform() {
    let v = json(&wsc(&["--format", "json", "analyze", &f("pr_box_model.json")]));
    assert!((v["contextual_fraction"]["cf"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["cnt1"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let v = json(&wsc(&["--format", "json", "analyze", &f("product_uniform_model.json")]));
    assert!(v["contextual_fraction"]["cf"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["verdicts"]["contextual_cbd"], false);
    assert_eq!(v["verdicts"]["contextual_sheaf"], false);
}

#[test]
fn analyze_text_and_json_agree() {
    let v = json(&wsc(&["--format", "json", "analyze", &f("quarter_box_model.json")]));
    let text = stdout(&wsc(&["analyze", &f("quarter_box_model.json")]));
    for (label, value) in [
        ("chsh violation", &v["chsh"]["violation"]),
        ("cnt1", &v["cnt1"]),
        ("contextual fraction", &v["contextual_fraction"]["cf"]),
    ] {
        assert!(text.contains(&format!("{label}: {:.6}", value.as_f64().unwrap())), "{label}");
    }
}

#[test]
fn original_schema_scenario_is_not_cyclic() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("ws.json");
    let o = wsc(&["schema", &f("councilmen_schema.json"), "--compile", "--out", scn.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let model = dir.path().join("m.json");
    std::fs::write(
        &model,
        r#"{"scenario": "ws.json", "distributions": [
            {"context": ["(they,feared)"], "probs": {"city councilmen": 0.9, "demonstrators": 0.1}},
            {"context": ["(they,advocated)"], "probs": {"city councilmen": 0.2, "demonstrators": 0.8}}]}"#,
    )
    .unwrap();
    let v = json(&wsc(&["--format", "json", "analyze", model.to_str().unwrap()]));
    assert_eq!(v["contextual_fraction"]["cf"].as_f64(), Some(0.0));
    assert!(v["cnt1"].is_null());
    assert!(v["notices"].to_string().contains("not a cyclic system"));
}

#[test]
fn responses_round_trip_through_schema_labels() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("agg.json");
    let o = wsc(&[
        "--format",
        "json",
        "analyze",
        "--responses",
        &f("responses_synthetic.csv"),
        "--schema",
        &f("cannibal_schema.json"),
        "--emit-model",
        model.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let compiled = json(&wsc(&["schema", &f("cannibal_schema.json"), "--compile"]));
    assert_eq!(v["scenario"]["contexts"], compiled["contexts"]);
    let valid: u64 = v["tallies"].as_array().unwrap().iter().map(|t| t["n_valid"].as_u64().unwrap()).sum();
    assert_eq!(valid, 348);
    assert_eq!(v["signalling"]["max_discrepancy"].as_f64(), Some(0.0));
    let again = json(&wsc(&["--format", "json", "analyze", model.to_str().unwrap()]));
    assert_eq!(again["chsh"], v["chsh"]);
}

#[test]
fn schema_compile_and_instantiate() {
    let v = json(&wsc(&["schema", &f("cannibal_schema.json"), "--compile"]));
    assert_eq!(v["contexts"].as_array().unwrap().len(), 4);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    wsc(&["schema", &f("cannibal_schema.json"), "--compile", "--out", p.to_str().unwrap()]);
    let m = dir.path().join("m.json");
    let rows = r#"{"A|A": 0.25, "A|B": 0.25, "B|A": 0.25, "B|B": 0.25}"#;
    let ctx: Vec<String> = v["contexts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| format!(r#"{{"context": {c}, "probs": {rows}}}"#))
        .collect();
    std::fs::write(&m, format!(r#"{{"scenario": "s.json", "distributions": [{}]}}"#, ctx.join(","))).unwrap();
    let a = json(&wsc(&["--format", "json", "analyze", m.to_str().unwrap()]));
    assert_eq!(a["scenario"]["cyclic_rank"], 4);

    let t = wsc(&["schema", &f("cannibal_schema.json"), "--instantiate", "herbivorous", "alive"]);
    assert_eq!(t.status.code(), Some(0));
    let text = stdout(&t);
    assert!(text.contains("herbivorous") && text.contains("no longer alive"));
    assert!(!text.contains("cannibalistic"));
    let bad = wsc(&["schema", &f("cannibal_schema.json"), "--instantiate", "carnivorous", "alive"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bootstrap_single_resample_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "--format",
        "json",
        "--seed",
        "5",
        "bootstrap",
        "--responses",
        &f("responses_synthetic.csv"),
        "--schema",
        &f("cannibal_schema.json"),
    ];
    let one = json(&wsc(&[&base[..], &["--samples", "1"]].concat()));
    assert_eq!(one["mean"], one["point_estimate"]);
    assert_eq!(one["std"].as_f64(), Some(0.0));

    let h1 = dir.path().join("h1.csv");
    let h2 = dir.path().join("h2.csv");
    let run = |h: &PathBuf, threads: &str| {
        let o = wsc(&[&base[..], &["--samples", "2000", "--threads", threads, "--out", h.to_str().unwrap()]].concat());
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    let s1 = run(&h1, "1");
    let s2 = run(&h2, "4");
    assert_eq!(s1, s2);
    let a = std::fs::read_to_string(&h1).unwrap();
    assert_eq!(a, std::fs::read_to_string(&h2).unwrap());
    assert!(a.starts_with("bin_center,density\n"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(wsc(&["analyze"]).status.code(), Some(2));
    assert_eq!(wsc(&["bogus"]).status.code(), Some(2));
}
