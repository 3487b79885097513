//! Six-headed tf-idf comment toxicity classifier.
//!
//! Text is normalized by [`preprocess`], turned into tf-idf features by
//! [`vectorize`], and scored by one binary classifier per label: linear
//! SVMs ([`svm`]) for toxic, obscene and insult, decision trees ([`tree`])
//! for severe_toxic, threat and identity_hate. [`multihead`] ties the six
//! pipelines together and applies the toxic -> severe_toxic gate; [`eval`]
//! scores predictions; [`bundle`] persists trained models.

pub mod bundle;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod labels;
pub mod multihead;
pub mod preprocess;
pub mod stats;
pub mod svm;
pub mod tree;
pub mod vectorize;

pub use bundle::{load_bundle, save_bundle, FORMAT_VERSION};
pub use corpus::{load_csv, split, CommentRecord, Corpus, LabelRow, SplitSpec};
pub use error::{Error, Result};
pub use eval::{ConfusionMatrix, MetricsReport, RocCurve};
pub use labels::{Label, NUM_LABELS};
pub use multihead::{train_all, Classifier, HeadConfig, HeadKind, MultiHeadModel, PipelineHead, TrainConfig};
pub use preprocess::{LemmaRules, PreprocessConfig, TokenList};
pub use svm::{StepSchedule, SvmConfig, SvmModel};
pub use tree::{TreeConfig, TreeModel, TreeNode};
pub use vectorize::{SparseVector, TfIdfModel, TfIdfOptions, Vocabulary};
