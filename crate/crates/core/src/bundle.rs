//! Model bundle persistence.
//!
//! A bundle is a directory:
//!
//! ```text
//! manifest.json        format_version, label order, head list, preprocessing files
//! stopwords.txt        one stopword per line
//! lemma_rules.txt      `irregular <form> <lemma>` / `suffix <pattern> <replacement> [repair]`
//! <label>.vocab        `num_docs=N smooth_idf=B l2_normalize=B`, then `word<TAB>index<TAB>doc_freq`
//! <label>.svm          `kind=svm dimension=V bias=B`, then `index<TAB>value` per nonzero weight
//! <label>.tree         `kind=tree dimension=V`, then pre-order `I <feature> <threshold>` / `L <label> <count0> <count1>`
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! reloaded model reproduces the saved one bit for bit.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Label;
use crate::multihead::{Classifier, HeadKind, MultiHeadModel, PipelineHead};
use crate::preprocess::{parse_stopwords, LemmaRules, PreprocessConfig};
use crate::svm::SvmModel;
use crate::tree::{PreorderNode, TreeModel};
use crate::vectorize::{TfIdfModel, TfIdfOptions, Vocabulary};

pub const FORMAT_VERSION: u64 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u64,
    pub labels: Vec<String>,
    pub heads: Vec<HeadEntry>,
    pub preprocess: PreprocessEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadEntry {
    pub label: String,
    pub kind: String,
    /// Classifier parameters.
    pub file: String,
    /// Vocabulary and document frequencies.
    pub vocab: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessEntry {
    pub lowercase: bool,
    pub stopwords: String,
    pub lemma_rules: String,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn save_bundle(model: &MultiHeadModel, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let pre = model.preprocess_config();
    write(&dir.join("stopwords.txt"), &pre.stopwords_text())?;
    write(&dir.join("lemma_rules.txt"), &pre.lemma_rules.to_text())?;

    let mut heads = Vec::new();
    for head in model.heads() {
        let label = head.label();
        let kind = head.classifier().kind();
        let entry = HeadEntry {
            label: label.name().to_string(),
            kind: kind.name().to_string(),
            file: format!("{label}.{kind}"),
            vocab: format!("{label}.vocab"),
        };
        write(&dir.join(&entry.vocab), &vocab_text(head.vectorizer()))?;
        write(&dir.join(&entry.file), &classifier_text(head.classifier()))?;
        heads.push(entry);
    }

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        labels: Label::ALL.iter().map(|l| l.name().to_string()).collect(),
        heads,
        preprocess: PreprocessEntry {
            lowercase: pre.lowercase,
            stopwords: "stopwords.txt".into(),
            lemma_rules: "lemma_rules.txt".into(),
        },
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write(&dir.join(MANIFEST_FILE), &json)
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<MultiHeadModel> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "bundle directory not found"),
        ));
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::Integrity(format!("{} is missing", manifest_path.display())));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest = parse_manifest(&text, &manifest_path.display().to_string())?;

    let expected: Vec<&str> = Label::ALL.iter().map(|l| l.name()).collect();
    if manifest.labels != expected {
        return Err(Error::Integrity(format!(
            "label order {:?} does not match {:?}",
            manifest.labels, expected
        )));
    }

    let read = |name: &str, what: &str| -> Result<String> {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(Error::Integrity(format!("{what}: file `{name}` is missing")));
        }
        fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
    };

    let stopwords = parse_stopwords(&read(&manifest.preprocess.stopwords, "stopwords")?);
    let rules = LemmaRules::parse(&read(&manifest.preprocess.lemma_rules, "lemma rules")?)?;
    let preprocess = PreprocessConfig::new(stopwords, rules, manifest.preprocess.lowercase);

    let by_label: HashMap<&str, &HeadEntry> =
        manifest.heads.iter().map(|h| (h.label.as_str(), h)).collect();
    if by_label.len() != manifest.heads.len() {
        return Err(Error::Integrity("duplicate head entries".into()));
    }
    let mut heads = Vec::with_capacity(Label::ALL.len());
    for label in Label::ALL {
        let entry = by_label
            .get(label.name())
            .ok_or_else(|| Error::Integrity(format!("missing head `{label}`")))?;
        let kind: HeadKind = entry.kind.parse()?;
        if kind != HeadKind::for_label(label) {
            return Err(Error::Integrity(format!(
                "head `{label}` must be {}, manifest says {kind}",
                HeadKind::for_label(label)
            )));
        }
        let what = format!("head `{label}`");
        let vectorizer = parse_vocab(&read(&entry.vocab, &what)?, &entry.vocab)?;
        let classifier = parse_classifier(&read(&entry.file, &what)?, &entry.file, kind)?;
        heads.push(PipelineHead::new(label, vectorizer, classifier)?);
    }
    MultiHeadModel::new(heads, preprocess)
}

fn parse_manifest(text: &str, context: &str) -> Result<Manifest> {
    let json_err = |e: serde_json::Error| Error::Parse {
        context: context.to_string(),
        row: e.line(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Integrity("manifest has no integer format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    serde_json::from_value(value).map_err(json_err)
}

fn vocab_text(model: &TfIdfModel) -> String {
    let opts = model.options();
    let mut out = format!(
        "num_docs={} smooth_idf={} l2_normalize={}\n",
        model.num_docs(),
        opts.smooth_idf,
        opts.l2_normalize
    );
    for (i, (word, df)) in model.vocab().words().iter().zip(model.doc_freq()).enumerate() {
        out.push_str(&format!("{word}\t{i}\t{df}\n"));
    }
    out
}

fn classifier_text(classifier: &Classifier) -> String {
    match classifier {
        Classifier::Svm(m) => {
            let mut out = format!("kind=svm dimension={} bias={}\n", m.dimension(), m.bias);
            for (i, &w) in m.theta.iter().enumerate() {
                if w != 0.0 {
                    out.push_str(&format!("{i}\t{w}\n"));
                }
            }
            out
        }
        Classifier::Tree(t) => {
            let mut out = format!("kind=tree dimension={}\n", t.dimension());
            for node in t.preorder() {
                match node {
                    PreorderNode::Internal { feature, threshold } => {
                        out.push_str(&format!("I {feature} {threshold}\n"))
                    }
                    PreorderNode::Leaf { label, class_counts } => out.push_str(&format!(
                        "L {} {} {}\n",
                        u8::from(label),
                        class_counts[0],
                        class_counts[1]
                    )),
                }
            }
            out
        }
    }
}

fn header_fields(line: Option<&str>, file: &str) -> Result<HashMap<String, String>> {
    let line = line.ok_or_else(|| parse_error(file, 1, "empty file".into()))?;
    line.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| parse_error(file, 1, format!("bad header field `{kv}`")))
        })
        .collect()
}

fn field<T: std::str::FromStr>(fields: &HashMap<String, String>, key: &str, file: &str) -> Result<T> {
    let raw = fields
        .get(key)
        .ok_or_else(|| parse_error(file, 1, format!("header lacks `{key}`")))?;
    raw.parse()
        .map_err(|_| parse_error(file, 1, format!("bad value `{raw}` for `{key}`")))
}

fn parse_error(file: &str, row: usize, message: String) -> Error {
    Error::Parse {
        context: file.to_string(),
        row,
        message,
    }
}

fn num<T: std::str::FromStr>(raw: Option<&str>, file: &str, row: usize) -> Result<T> {
    let raw = raw.ok_or_else(|| parse_error(file, row, "missing field".into()))?;
    raw.parse()
        .map_err(|_| parse_error(file, row, format!("cannot parse `{raw}`")))
}

fn parse_vocab(text: &str, file: &str) -> Result<TfIdfModel> {
    let mut lines = text.lines();
    let header = header_fields(lines.next(), file)?;
    let num_docs: u64 = field(&header, "num_docs", file)?;
    let options = TfIdfOptions {
        smooth_idf: field(&header, "smooth_idf", file)?,
        l2_normalize: field(&header, "l2_normalize", file)?,
    };
    let mut words = Vec::new();
    let mut doc_freq = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = k + 2;
        let mut parts = line.split('\t');
        let word = parts.next().unwrap_or_default();
        let index: usize = num(parts.next(), file, row)?;
        let df: u64 = num(parts.next(), file, row)?;
        if parts.next().is_some() || word.is_empty() {
            return Err(parse_error(file, row, "expected word<TAB>index<TAB>doc_freq".into()));
        }
        if index != words.len() {
            return Err(parse_error(file, row, format!("index {index} out of sequence")));
        }
        words.push(word.to_string());
        doc_freq.push(df);
    }
    let vocab = Vocabulary::from_words(words)?;
    TfIdfModel::from_parts(vocab, doc_freq, num_docs, options)
}

fn parse_classifier(text: &str, file: &str, kind: HeadKind) -> Result<Classifier> {
    let mut lines = text.lines();
    let header = header_fields(lines.next(), file)?;
    let found: String = field(&header, "kind", file)?;
    if found != kind.name() {
        return Err(Error::Integrity(format!("{file}: expected kind={kind}, found kind={found}")));
    }
    let dimension: usize = field(&header, "dimension", file)?;
    match kind {
        HeadKind::Svm => {
            let bias: f64 = field(&header, "bias", file)?;
            let mut theta = vec![0.0; dimension];
            for (k, line) in lines.enumerate() {
                let row = k + 2;
                let mut parts = line.split('\t');
                let index: usize = num(parts.next(), file, row)?;
                let value: f64 = num(parts.next(), file, row)?;
                if index >= dimension || parts.next().is_some() {
                    return Err(parse_error(file, row, format!("bad weight line `{line}`")));
                }
                theta[index] = value;
            }
            Ok(Classifier::Svm(SvmModel { theta, bias }))
        }
        HeadKind::Tree => {
            let mut nodes = Vec::new();
            for (k, line) in lines.enumerate() {
                let row = k + 2;
                let mut parts = line.split(' ');
                let node = match parts.next() {
                    Some("I") => PreorderNode::Internal {
                        feature: num(parts.next(), file, row)?,
                        threshold: num(parts.next(), file, row)?,
                    },
                    Some("L") => {
                        let label: u8 = num(parts.next(), file, row)?;
                        if label > 1 {
                            return Err(parse_error(file, row, "leaf label must be 0 or 1".into()));
                        }
                        PreorderNode::Leaf {
                            label: label == 1,
                            class_counts: [num(parts.next(), file, row)?, num(parts.next(), file, row)?],
                        }
                    }
                    _ => return Err(parse_error(file, row, format!("bad node line `{line}`"))),
                };
                if parts.next().is_some() {
                    return Err(parse_error(file, row, format!("trailing fields in `{line}`")));
                }
                nodes.push(node);
            }
            TreeModel::from_preorder(nodes, dimension)
                .map(Classifier::Tree)
                .map_err(|e| Error::Integrity(format!("{file}: {e}")))
        }
    }
}
