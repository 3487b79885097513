use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HEADER: &str = "id,comment_text,toxic,severe_toxic,obscene,threat,insult,identity_hate";
const BENIGN: [&str; 8] = ["article", "edit", "source", "page", "history", "thanks", "citation", "talk"];
const RUDE: [&str; 4] = ["idiot", "stupid", "moron", "loser"];

fn toxgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toxgate"))
        .args(args)
        .output()
        .expect("run toxgate")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Deterministic labelled corpus: every third row is toxic and insulting,
/// every other toxic row is also severe, every fifth toxic row is obscene.
fn write_corpus(path: &Path, rows: usize) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(HEADER.split(',')).unwrap();
    for i in 0..rows {
        let toxic = i % 3 == 0;
        let severe = toxic && i % 2 == 0;
        let obscene = toxic && i % 5 == 0;
        let mut words: Vec<&str> = (0..4 + i % 6).map(|k| BENIGN[(i * 7 + k * 3) % BENIGN.len()]).collect();
        if toxic {
            words.push(RUDE[i % RUDE.len()]);
            words.push(RUDE[(i + 1) % RUDE.len()]);
        }
        if severe {
            words.extend(["SCUM", "SCUM"]);
        }
        if obscene {
            words.push("crap");
        }
        let text = format!("{}, indeed!", words.join(" "));
        let flag = |b: bool| if b { "1" } else { "0" };
        w.write_record([
            format!("{i:04}").as_str(),
            &text,
            flag(toxic),
            flag(severe),
            flag(obscene),
            "0",
            flag(toxic),
            "0",
        ])
        .unwrap();
    }
    w.flush().unwrap();
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_corpus(&dir.path().join("data.csv"), 240);
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn train(&self, out: &str, extra: &[&str]) -> Output {
        let data = self.p("data.csv");
        let out = self.p(out);
        let mut args = vec!["train", "--data", &data, "--out", &out, "--svm-iters", "20"];
        args.extend_from_slice(extra);
        toxgate(&args)
    }
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn train_reports_and_saves_bundle() {
    let fx = Fixture::new();
    let report = fx.p("report.csv");
    let out = fx.train("model", &["--seed", "3", "--report", &report]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("training accuracy"));
    let training_block = text.split("\n\n").next().unwrap();
    assert!(training_block.contains("toxic"));
    assert!(!training_block.contains("severe_toxic"), "severe_toxic training accuracy is not shown");
    for label in ["[toxic]", "[severe_toxic]", "[identity_hate]", "[collective]"] {
        assert!(text.contains(label), "missing {label}");
    }
    assert!(fx.path("model/manifest.json").is_file());
    let rows = parse_csv(&fs::read_to_string(&report).unwrap());
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[7][0], "collective");
}

#[test]
fn same_seed_is_byte_identical() {
    let fx = Fixture::new();
    let (r1, r2) = (fx.p("r1.csv"), fx.p("r2.csv"));
    assert_eq!(code(&fx.train("m1", &["--seed", "7", "--report", &r1, "--jobs", "2"])), 0);
    assert_eq!(code(&fx.train("m2", &["--seed", "7", "--report", &r2, "--jobs", "3"])), 0);
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    for file in ["manifest.json", "toxic.svm", "threat.tree", "insult.vocab"] {
        assert_eq!(
            fs::read(fx.path("m1").join(file)).unwrap(),
            fs::read(fx.path("m2").join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn missing_data_file_exits_2_naming_path() {
    let fx = Fixture::new();
    let missing = fx.p("absent.csv");
    let out = toxgate(&["train", "--data", &missing, "--out", &fx.p("m")]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("absent.csv"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "single-line diagnostic: {err}");
}

#[test]
fn bad_flags_exit_2() {
    let fx = Fixture::new();
    assert_eq!(code(&fx.train("m", &["--split", "1.0"])), 2);
    assert_eq!(code(&fx.train("m", &["--svm-c", "-1"])), 2);
    assert_eq!(code(&toxgate(&["train"])), 2);
    assert_eq!(code(&toxgate(&["frobnicate"])), 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let fx = Fixture::new();
    let cfg = fx.p("cfg.json");
    fs::write(&cfg, r#"{"seed": 5, "split": 0.75, "max_depth": 4}"#).unwrap();
    let out = fx.train("m", &["--config", &cfg, "--split", "0.5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("training on 120 rows"), "{}", stderr(&out));

    fs::write(&cfg, r#"{"sede": 5}"#).unwrap();
    let out = fx.train("m", &["--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sede"));
}

#[test]
fn evaluate_writes_report_and_roc_curves() {
    let fx = Fixture::new();
    assert_eq!(code(&fx.train("model", &[])), 0);
    let report = fx.p("eval.csv");
    let roc_dir = fx.p("roc");
    let out = toxgate(&[
        "evaluate", "--model", &fx.p("model"), "--data", &fx.p("data.csv"), "--report", &report, "--roc-dir", &roc_dir,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let rows = parse_csv(&fs::read_to_string(&report).unwrap());
    let acc: Vec<f64> = rows[1..7].iter().map(|r| r[1].parse().unwrap()).collect();
    let mean: f64 = rows[7][1].parse().unwrap();
    assert!((acc.iter().sum::<f64>() / 6.0 - mean).abs() < 1e-6);

    let roc = parse_csv(&fs::read_to_string(fx.path("roc/toxic_roc.csv")).unwrap());
    assert_eq!(roc.len(), 4);
    assert_eq!(roc[0], ["fpr", "tpr"]);
    assert_eq!(roc[1], ["0.000000", "0.000000"]);
    assert_eq!(roc[3], ["1.000000", "1.000000"]);
    assert!(!fx.path("roc/threat_roc.csv").exists(), "threat is single-class in this corpus");
}

#[test]
fn evaluate_error_codes() {
    let fx = Fixture::new();
    assert_eq!(code(&fx.train("model", &[])), 0);
    let model = fx.p("model");
    let report = fx.p("r.csv");

    fs::write(fx.path("empty.csv"), format!("{HEADER}\n")).unwrap();
    let out = toxgate(&["evaluate", "--model", &model, "--data", &fx.p("empty.csv"), "--report", &report]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let data = fs::read_to_string(fx.path("data.csv")).unwrap();
    fs::write(fx.path("renamed.csv"), data.replacen("identity_hate", "hate", 1)).unwrap();
    let out = toxgate(&["evaluate", "--model", &model, "--data", &fx.p("renamed.csv"), "--report", &report]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    let manifest = fx.path("model/manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    fs::write(&manifest, text.replace("\"format_version\": 1", "\"format_version\": 2")).unwrap();
    let out = toxgate(&["evaluate", "--model", &model, "--data", &fx.p("data.csv"), "--report", &report]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn predict_text_and_file() {
    let fx = Fixture::new();
    assert_eq!(code(&fx.train("model", &[])), 0);
    let model = fx.p("model");

    let out = toxgate(&["predict", "--model", &model, "--text", "you stupid idiot SCUM SCUM"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], ["toxic", "severe_toxic", "obscene", "threat", "insult", "identity_hate"]);
    assert!(rows[1].iter().all(|f| f == "0" || f == "1"));
    assert_eq!(rows[1][0], "1");

    fs::write(
        fx.path("in.csv"),
        "id,comment_text\nz9,\"thanks, for the edit\"\n\"a,1\",stupid moron SCUM SCUM\nb0,\n",
    )
    .unwrap();
    let pred = fx.p("pred.csv");
    let out = toxgate(&["predict", "--model", &model, "--file", &fx.p("in.csv"), "--out", &pred]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = parse_csv(&fs::read_to_string(&pred).unwrap());
    assert_eq!(rows[0][0], "id");
    let ids: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ids, ["z9", "a,1", "b0"]);
    for r in &rows[1..] {
        assert!(r[2] <= r[1], "severe_toxic <= toxic in {r:?}");
    }
}

#[test]
fn predict_error_codes() {
    let fx = Fixture::new();
    let out = toxgate(&["predict", "--model", &fx.p("no-model"), "--text", "hi"]);
    assert_eq!(code(&out), 2);
    fs::create_dir(fx.path("empty-model")).unwrap();
    let out = toxgate(&["predict", "--model", &fx.p("empty-model"), "--text", "hi"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let out = toxgate(&["predict", "--model", &fx.p("empty-model")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn stats_histogram() {
    let fx = Fixture::new();
    let hist = fx.p("hist.csv");
    let out = toxgate(&["stats", "--data", &fx.p("data.csv"), "--out", &hist]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = stderr(&out);
    assert!(summary.starts_with("n=240 iqr="), "{summary}");
    let rows = parse_csv(&fs::read_to_string(&hist).unwrap());
    assert_eq!(rows[0], ["bin_lower_edge", "count"]);
    let total: u64 = rows[1..].iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 240);

    fs::write(fx.path("toy.csv"), "id,comment_text\n1,same\n2,same\n").unwrap();
    let out = toxgate(&["stats", "--data", &fx.p("toy.csv"), "--unit", "tokens", "--out", &hist]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("bins=1"));
    assert_eq!(parse_csv(&fs::read_to_string(&hist).unwrap()), [["bin_lower_edge", "count"], ["1", "2"]]);

    let out = toxgate(&["stats", "--data", &fx.p("toy.csv"), "--unit", "words", "--out", &hist]);
    assert_eq!(code(&out), 2);
}
