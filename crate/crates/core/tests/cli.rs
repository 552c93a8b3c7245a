use std::path::{Path, PathBuf};

use serde_json::Value;
use toxicbg::cli::{run, EXIT_IO, EXIT_OK, EXIT_USAGE};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn toxicbg(args: &[&str], stdin: &str) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("toxicbg").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json_lines(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).expect(l)).collect()
}

#[test]
fn classify_single_label() {
    let lex = fixture("lexicon.tsv");
    let out = toxicbg(&["classify", "--lexicon", &lex, "--text", "Купих нова печка.", "--single-label"], "");
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["collapsed"], "toxic");
    assert_eq!(v["labels"], serde_json::json!(["toxic", "nontoxic"]));
    assert_eq!(v["matches"][0]["form"], "печка");
}

#[test]
fn classify_default_label() {
    let out = toxicbg(&["classify", "--lexicon", &fixture("lexicon.tsv"), "--text", "Здравей"], "");
    assert_eq!(out.code, EXIT_OK);
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["labels"], serde_json::json!(["nontoxic"]));
    assert_eq!(v["collapsed"], Value::Null);
    assert_eq!(v["matches"], serde_json::json!([]));
}

#[test]
fn classify_stdin_and_jsonl_input() {
    let lex = fixture("lexicon.tsv");
    let out = toxicbg(
        &["classify", "--lexicon", &lex, "--single-label", "--format", "text"],
        "Купих нова печка.\r\n\nседалище на фирмата\nЗдравей\n",
    );
    assert_eq!(out.code, EXIT_OK);
    let labels: Vec<&str> = out.stdout.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(labels, ["toxic", "medical", "nontoxic"]);

    let out = toxicbg(&["classify", "--lexicon", &lex, "--input", &fixture("unlabeled.jsonl")], "");
    let rows = json_lines(&out.stdout);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["labels"], serde_json::json!(["medical", "nontoxic"]));
}

#[test]
fn classify_custom_priority() {
    let lex = fixture("lexicon.tsv");
    let args = ["classify", "--lexicon", &lex, "--text", "печка", "--single-label", "--priority"];
    let out = toxicbg(&[&args[..], &["nontoxic,toxic,medical,minority"]].concat(), "");
    assert_eq!(json_lines(&out.stdout)[0]["collapsed"], "nontoxic");
    let out = toxicbg(&[&args[..], &["toxic,toxic,medical,minority"]].concat(), "");
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn lexicon_errors_exit_2() {
    let out = toxicbg(&["classify", "--lexicon", "/nonexistent/fixture.tsv", "--text", "x"], "");
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("lexicon"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "ok\ttoxic\nbroken\n").unwrap();
    let out = toxicbg(&["classify", "--lexicon", bad.to_str().unwrap(), "--text", "x"], "");
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);
}

#[test]
fn missing_input_file_is_io_error() {
    let out = toxicbg(
        &["classify", "--lexicon", &fixture("lexicon.tsv"), "--input", "/nonexistent/in.jsonl"],
        "",
    );
    assert_eq!(out.code, EXIT_IO);
}

#[test]
fn filter_contexts() {
    let lex = fixture("lexicon.tsv");
    let sentence = "Лекарят каза medword.";
    let out = toxicbg(&["filter", "--lexicon", &lex, "--context", "forum", "--text", sentence], "");
    assert_eq!(out.code, EXIT_OK);
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["blocked"], false);
    assert_eq!(v["triggering_forms"], serde_json::json!([]));

    let out = toxicbg(&["filter", "--lexicon", &lex, "--context", "family-friendly", "--text", sentence], "");
    assert_eq!(out.code, EXIT_OK);
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["blocked"], true);
    assert_eq!(v["triggering_forms"], serde_json::json!(["medword"]));
}

#[test]
fn filter_policy_expressions() {
    let lex = fixture("lexicon.tsv");
    let out = toxicbg(&["filter", "--lexicon", &lex, "--policy-expr", "Toxic AND (", "--text", "x"], "");
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("position 10"), "{}", out.stderr);

    let out = toxicbg(
        &["filter", "--lexicon", &lex, "--policy-expr", "MinorityGroup", "--text", "slurword и badword"],
        "",
    );
    assert_eq!(json_lines(&out.stdout)[0]["triggering_forms"], serde_json::json!(["slurword"]));

    let dir = tempfile::tempdir().unwrap();
    let policies = dir.path().join("policies.json");
    std::fs::write(&policies, r#"[{"name": "strict-medical", "expr": "MedicalTerminology"}]"#).unwrap();
    let p = policies.to_str().unwrap();
    let out = toxicbg(
        &["filter", "--lexicon", &lex, "--policy", "strict-medical", "--policy-file", p],
        "седалище\nнищо\n",
    );
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let blocked: Vec<_> = json_lines(&out.stdout).iter().map(|v| v["blocked"].clone()).collect();
    assert_eq!(blocked, [Value::Bool(true), Value::Bool(false)]);

    let out = toxicbg(&["filter", "--lexicon", &lex, "--text", "x"], "");
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn evaluate_reports() {
    let gold = fixture("gold3.jsonl");
    let out = toxicbg(&["evaluate", "--gold", &gold, "--pred", &fixture("pred3.jsonl")], "");
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let macro_line = out.stdout.lines().find(|l| l.starts_with("Macro Average")).unwrap();
    assert_eq!(macro_line.split_whitespace().nth(4), Some("0.67"));

    let out = toxicbg(&["evaluate", "--gold", &gold, "--pred", &gold], "");
    let acc = out.stdout.lines().find(|l| l.starts_with("Accuracy")).unwrap();
    assert!(acc.contains("1.00"));

    let out = toxicbg(&["evaluate", "--gold", &gold, "--pred", &gold, "--format", "json"], "");
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["accuracy"], 1.0);
    assert_eq!(v["per_class"][0]["class"], "toxic");
    assert!(v["confusion"].is_array());
}

#[test]
fn evaluate_mismatches_exit_2() {
    let gold = fixture("gold3.jsonl");
    let out = toxicbg(&["evaluate", "--gold", &gold, "--pred", &fixture("eval40.jsonl")], "");
    assert_eq!(out.code, EXIT_USAGE);

    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other.jsonl");
    std::fs::write(
        &other,
        "{\"text\":\"sentence a\",\"label\":\"toxic\"}\n{\"text\":\"different\",\"label\":\"toxic\"}\n{\"text\":\"sentence c\",\"label\":\"toxic\"}\n",
    )
    .unwrap();
    let out = toxicbg(&["evaluate", "--gold", &gold, "--pred", other.to_str().unwrap()], "");
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stderr.contains("record 2"), "{}", out.stderr);

    let out = toxicbg(&["evaluate", "--gold", &fixture("unlabeled.jsonl"), "--pred", &gold], "");
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn evaluate_with_ontology_classifier() {
    let out = toxicbg(
        &["evaluate", "--gold", &fixture("eval40.jsonl"), "--lexicon", &fixture("lexicon.tsv"), "--format", "json"],
        "",
    );
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["accuracy"], 0.55);
    assert_eq!(v["total"], 40);

    let out = toxicbg(
        &["evaluate", "--gold", &fixture("eval40.jsonl"), "--lexicon", &fixture("lexicon.tsv"), "--macro-all-classes"],
        "",
    );
    assert!(out.stdout.contains("Macro Average"));
}

#[test]
fn lexicon_stats_and_members() {
    let lex = fixture("lexicon.tsv");
    let out = toxicbg(&["lexicon", "stats", &lex], "");
    assert_eq!(out.code, EXIT_OK);
    let v = &json_lines(&out.stdout)[0];
    let diag: Vec<u64> = (0..4).map(|i| v["cooccurrence"][i][i].as_u64().unwrap()).collect();
    assert_eq!(diag, [4, 2, 2, 1]);
    assert_eq!(v["class_counts"][0]["percent"], 80.0);

    let out = toxicbg(&["lexicon", "members", &lex, "--class", "FamilyFriendlyContentBlocked"], "");
    assert_eq!(out.stdout, "badword\nmedword\nslurword\n");
    let out = toxicbg(&["lexicon", "members", &lex, "--class", "Nope"], "");
    assert_eq!(out.code, EXIT_USAGE);

    let out = toxicbg(&["lexicon", "export", &lex], "");
    let export: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(export["individuals"].as_array().unwrap().len(), 5);
    assert_eq!(export["derived"][2]["name"], "ForumContentBlocked");
    assert_eq!(
        export["derived"][2]["expr"],
        "Toxic AND NOT NonToxic AND NOT MedicalTerminology AND NOT MinorityGroup"
    );
}

#[test]
fn lexicon_export_with_policy_classes() {
    let dir = tempfile::tempdir().unwrap();
    let policies = dir.path().join("p.json");
    std::fs::write(&policies, r#"[{"name": "Ambiguous", "expr": "Toxic"}]"#).unwrap();
    let out = toxicbg(
        &["lexicon", "export", &fixture("lexicon.tsv"), "--policy-file", policies.to_str().unwrap()],
        "",
    );
    assert_eq!(out.code, EXIT_USAGE, "built-in derived class names cannot be shadowed");
}

#[test]
fn corpus_split_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let train: PathBuf = dir.path().join("train.jsonl");
    let test: PathBuf = dir.path().join("test.jsonl");
    let args = [
        "corpus",
        "split",
        &fixture("split100.jsonl"),
        "--fraction",
        "0.2",
        "--seed",
        "7",
        "--train-out",
        train.to_str().unwrap(),
        "--test-out",
        test.to_str().unwrap(),
    ];
    let out = toxicbg(&args, "");
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert_eq!(json_lines(&out.stdout)[0]["test"], 20);
    let test_rows = std::fs::read_to_string(&test).unwrap();
    assert_eq!(test_rows.lines().count(), 20);
    assert_eq!(test_rows.matches("\"toxic\"").count(), 12);
    let first = std::fs::read_to_string(&train).unwrap();

    toxicbg(&args, "");
    assert_eq!(std::fs::read_to_string(&train).unwrap(), first);

    let out = toxicbg(&["corpus", "split", &fixture("unlabeled.jsonl"), "--fraction", "0.5", "--seed", "1"], "");
    assert_eq!(out.code, EXIT_USAGE);
}

#[test]
fn corpus_annotate_and_stats() {
    let out = toxicbg(
        &["corpus", "annotate", &fixture("unlabeled.jsonl"), "--lexicon", &fixture("lexicon.tsv")],
        "",
    );
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let labels: Vec<_> = json_lines(&out.stdout).iter().map(|v| v["label"].clone()).collect();
    assert_eq!(labels, ["toxic", "nontoxic", "medical"]);
    let summary: Value = serde_json::from_str(out.stderr.trim()).unwrap();
    assert_eq!(summary["total"], 3);
    assert_eq!(summary["non_nontoxic"], 2);

    let out = toxicbg(&["corpus", "stats", &fixture("eval40.jsonl")], "");
    let v = &json_lines(&out.stdout)[0];
    assert_eq!(v["total"], 40);
    let counts: Vec<u64> = (0..4).map(|i| v["labels"][i]["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, [12, 10, 12, 6]);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(toxicbg(&["classify"], "").code, EXIT_USAGE);
    assert_eq!(toxicbg(&["bogus"], "").code, EXIT_USAGE);
    assert_eq!(toxicbg(&["--help"], "").code, EXIT_OK);
}
