//! The six per-label pipelines and the toxic -> severe_toxic gate.
//!
//! Every head owns its own tf-idf vectorizer fitted on the training split.
//! toxic, obscene and insult use a linear SVM; severe_toxic, threat and
//! identity_hate use a decision tree. At prediction time severe_toxic is
//! only consulted for comments the toxic head flags; all others get 0.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Corpus, LabelRow};
use crate::error::{Error, Result};
use crate::labels::{Label, NUM_LABELS};
use crate::preprocess::{preprocess, PreprocessConfig, TokenList};
use crate::svm::{self, SvmConfig, SvmModel};
use crate::tree::{TreeConfig, TreeModel, TreeNode};
use crate::vectorize::{SparseVector, TfIdfModel, TfIdfOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeadKind {
    Svm,
    Tree,
}

impl HeadKind {
    pub fn for_label(label: Label) -> HeadKind {
        match label {
            Label::Toxic | Label::Obscene | Label::Insult => HeadKind::Svm,
            Label::SevereToxic | Label::Threat | Label::IdentityHate => HeadKind::Tree,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HeadKind::Svm => "svm",
            HeadKind::Tree => "tree",
        }
    }
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm" => Ok(HeadKind::Svm),
            "tree" => Ok(HeadKind::Tree),
            other => Err(Error::invalid(format!("unknown head kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Svm(SvmModel),
    Tree(TreeModel),
}

impl Classifier {
    pub fn kind(&self) -> HeadKind {
        match self {
            Classifier::Svm(_) => HeadKind::Svm,
            Classifier::Tree(_) => HeadKind::Tree,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Classifier::Svm(m) => m.dimension(),
            Classifier::Tree(t) => t.dimension(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineHead {
    label: Label,
    vectorizer: TfIdfModel,
    classifier: Classifier,
}

impl PipelineHead {
    pub fn new(label: Label, vectorizer: TfIdfModel, classifier: Classifier) -> Result<Self> {
        if classifier.kind() != HeadKind::for_label(label) {
            return Err(Error::Integrity(format!(
                "head `{label}` must be {}, found {}",
                HeadKind::for_label(label),
                classifier.kind()
            )));
        }
        if classifier.dimension() != vectorizer.dimension() {
            return Err(Error::Integrity(format!(
                "head `{label}`: classifier dimension {} differs from vocabulary size {}",
                classifier.dimension(),
                vectorizer.dimension()
            )));
        }
        Ok(PipelineHead {
            label,
            vectorizer,
            classifier,
        })
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn vectorizer(&self) -> &TfIdfModel {
        &self.vectorizer
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn features(&self, tokens: &[String]) -> SparseVector {
        self.vectorizer.transform(tokens)
    }

    pub fn predict_tokens(&self, tokens: &[String]) -> bool {
        let x = self.features(tokens);
        let out = match &self.classifier {
            Classifier::Svm(m) => m.predict(&x),
            Classifier::Tree(t) => t.predict(&x),
        };
        out.expect("dimensions are checked when the head is built")
    }

    /// Ranking score: the SVM decision value, or the positive fraction of
    /// the tree leaf reached.
    pub fn score_tokens(&self, tokens: &[String]) -> f64 {
        let x = self.features(tokens);
        match &self.classifier {
            Classifier::Svm(m) => m.decision_value(&x).expect("dimension checked"),
            Classifier::Tree(t) => match t.leaf_for(&x).expect("dimension checked").0 {
                TreeNode::Leaf { class_counts: [n, p], .. } if n + p > 0 => *p as f64 / (n + p) as f64,
                _ => 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadConfig {
    Svm(SvmConfig),
    Tree(TreeConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// One entry per label in [`Label::ALL`] order.
    pub heads: [HeadConfig; NUM_LABELS],
    pub tfidf: TfIdfOptions,
    /// Train severe_toxic only on rows whose toxic label is 1.
    pub gated_training: bool,
    /// Worker threads for head training and batch prediction.
    pub jobs: usize,
}

impl TrainConfig {
    /// Uses `svm` and `tree` for every head of the matching kind, giving
    /// each SVM head its own seed derived from `seed`.
    pub fn uniform(seed: u64, svm: SvmConfig, tree: TreeConfig) -> Self {
        let heads = Label::ALL.map(|label| match HeadKind::for_label(label) {
            HeadKind::Svm => HeadConfig::Svm(SvmConfig {
                seed: derive_seed(seed, label.index() as u64),
                ..svm
            }),
            HeadKind::Tree => HeadConfig::Tree(tree),
        });
        TrainConfig {
            heads,
            tfidf: TfIdfOptions::default(),
            gated_training: false,
            jobs: 1,
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::uniform(0, SvmConfig::default(), TreeConfig::default())
    }
}

/// SplitMix64 finalizer over `seed + stream`: one sub-seed per consumer of
/// the run seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiHeadModel {
    heads: Vec<PipelineHead>,
    preprocess: PreprocessConfig,
}

impl MultiHeadModel {
    /// `heads` must hold one head per label in [`Label::ALL`] order.
    pub fn new(heads: Vec<PipelineHead>, preprocess: PreprocessConfig) -> Result<Self> {
        if heads.len() != NUM_LABELS {
            return Err(Error::Integrity(format!(
                "expected {NUM_LABELS} heads, found {}",
                heads.len()
            )));
        }
        for (head, label) in heads.iter().zip(Label::ALL) {
            if head.label != label {
                return Err(Error::Integrity(format!(
                    "head for `{label}` expected at position {}, found `{}`",
                    label.index(),
                    head.label
                )));
            }
        }
        Ok(MultiHeadModel { heads, preprocess })
    }

    pub fn heads(&self) -> &[PipelineHead] {
        &self.heads
    }

    pub fn head(&self, label: Label) -> &PipelineHead {
        &self.heads[label.index()]
    }

    pub fn preprocess_config(&self) -> &PreprocessConfig {
        &self.preprocess
    }

    pub fn tokens(&self, text: &str) -> TokenList {
        preprocess(text, &self.preprocess)
    }

    pub fn predict_row(&self, text: &str) -> LabelRow {
        self.predict_row_traced(text, |_| {})
    }

    /// Like [`predict_row`](Self::predict_row), calling `on_invoke` once for
    /// every head actually evaluated.
    pub fn predict_row_traced(&self, text: &str, mut on_invoke: impl FnMut(Label)) -> LabelRow {
        let tokens = self.tokens(text);
        let mut row = LabelRow::default();
        for head in &self.heads {
            if head.label == Label::SevereToxic {
                continue;
            }
            on_invoke(head.label);
            row.set(head.label, head.predict_tokens(&tokens));
        }
        if row.get(Label::Toxic) {
            on_invoke(Label::SevereToxic);
            let severe = self.head(Label::SevereToxic).predict_tokens(&tokens);
            row.set(Label::SevereToxic, severe);
        }
        row
    }

    pub fn predict_batch<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<LabelRow> {
        texts.par_iter().map(|t| self.predict_row(t.as_ref())).collect()
    }

    pub fn predict_corpus(&self, corpus: &Corpus) -> Vec<LabelRow> {
        corpus
            .records
            .par_iter()
            .map(|r| self.predict_row(&r.text))
            .collect()
    }

    /// Ungated per-head accuracy against each label column of `corpus`.
    pub fn head_accuracies(&self, corpus: &Corpus) -> Result<[f64; NUM_LABELS]> {
        if corpus.is_empty() {
            return Err(Error::invalid("accuracy over an empty corpus"));
        }
        let tokens: Vec<TokenList> = corpus.records.par_iter().map(|r| self.tokens(&r.text)).collect();
        let mut out = [0.0; NUM_LABELS];
        for head in &self.heads {
            let correct = tokens
                .par_iter()
                .zip(&corpus.records)
                .filter(|(t, r)| head.predict_tokens(t) == r.labels.get(head.label))
                .count();
            out[head.label.index()] = correct as f64 / corpus.len() as f64;
        }
        Ok(out)
    }
}

/// Fits all six pipelines on `train`.
pub fn train_all(train: &Corpus, config: &TrainConfig, preprocess_config: PreprocessConfig) -> Result<MultiHeadModel> {
    if train.is_empty() {
        return Err(Error::invalid("cannot train on an empty corpus"));
    }
    for (label, head) in Label::ALL.iter().zip(&config.heads) {
        let ok = matches!(
            (HeadKind::for_label(*label), head),
            (HeadKind::Svm, HeadConfig::Svm(_)) | (HeadKind::Tree, HeadConfig::Tree(_))
        );
        if !ok {
            return Err(Error::invalid(format!(
                "head `{label}` needs a {} config",
                HeadKind::for_label(*label)
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    pool.install(|| {
        let tokens: Vec<TokenList> = train
            .records
            .par_iter()
            .map(|r| preprocess(&r.text, &preprocess_config))
            .collect();
        let heads = Label::ALL
            .par_iter()
            .map(|&label| train_head(label, &config.heads[label.index()], &tokens, train, config))
            .collect::<Result<Vec<_>>>()?;
        MultiHeadModel::new(heads, preprocess_config.clone())
    })
}

fn train_head(
    label: Label,
    head_config: &HeadConfig,
    tokens: &[TokenList],
    train: &Corpus,
    config: &TrainConfig,
) -> Result<PipelineHead> {
    let rows: Vec<usize> = if label == Label::SevereToxic && config.gated_training {
        (0..train.len())
            .filter(|&i| train.records[i].labels.get(Label::Toxic))
            .collect()
    } else {
        (0..train.len()).collect()
    };
    if rows.is_empty() {
        return Err(Error::invalid(format!(
            "gated training of `{label}` needs at least one toxic training row"
        )));
    }
    let docs: Vec<&[String]> = rows.iter().map(|&i| tokens[i].as_slice()).collect();
    let vectorizer = TfIdfModel::fit_corpus(&docs, config.tfidf)?;
    let xs: Vec<SparseVector> = docs.iter().map(|d| vectorizer.transform(d)).collect();
    let ys: Vec<bool> = rows.iter().map(|&i| train.records[i].labels.get(label)).collect();
    let classifier = match head_config {
        HeadConfig::Svm(c) => Classifier::Svm(svm::train(&xs, &ys, c)?),
        HeadConfig::Tree(c) => Classifier::Tree(TreeModel::train(&xs, &ys, c)?),
    };
    PipelineHead::new(label, vectorizer, classifier)
}
