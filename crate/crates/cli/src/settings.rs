//! Training settings: optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toxgate_core::preprocess::parse_stopwords;
use toxgate_core::{LemmaRules, PreprocessConfig, SvmConfig, TfIdfOptions, TrainConfig, TreeConfig};

use crate::error::{CliError, CliResult};
use crate::TrainArgs;

/// Keys accepted in a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub seed: Option<u64>,
    pub split: Option<f64>,
    pub jobs: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: Option<usize>,
    pub svm_c: Option<f64>,
    pub svm_iters: Option<usize>,
    pub svm_tolerance: Option<f64>,
    pub smooth_idf: Option<bool>,
    pub l2_normalize: Option<bool>,
    pub gated_training: Option<bool>,
    pub lowercase: Option<bool>,
    pub stopwords: Option<PathBuf>,
    pub lemma_rules: Option<PathBuf>,
}

impl SettingsFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub struct TrainSettings {
    pub seed: u64,
    pub split: f64,
    pub train: TrainConfig,
    pub preprocess: PreprocessConfig,
}

impl TrainSettings {
    pub fn resolve(args: &TrainArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => SettingsFile::load(path)?,
            None => SettingsFile::default(),
        };

        let seed = args.seed.or(file.seed).unwrap_or(0);
        let split = args.split.or(file.split).unwrap_or(0.8);
        let svm_defaults = SvmConfig::default();
        let svm = SvmConfig {
            c: args.svm_c.or(file.svm_c).unwrap_or(svm_defaults.c),
            max_iter: args.svm_iters.or(file.svm_iters).unwrap_or(svm_defaults.max_iter),
            tolerance: args.svm_tolerance.or(file.svm_tolerance),
            ..svm_defaults
        };
        let tree = TreeConfig {
            max_depth: args.max_depth.or(file.max_depth),
            min_samples_split: args
                .min_samples_split
                .or(file.min_samples_split)
                .unwrap_or(TreeConfig::default().min_samples_split),
        };
        svm.validate()?;
        tree.validate()?;

        let mut train = TrainConfig::uniform(seed, svm, tree);
        train.tfidf = TfIdfOptions {
            smooth_idf: args.smooth_idf || file.smooth_idf.unwrap_or(false),
            l2_normalize: args.l2_normalize || file.l2_normalize.unwrap_or(false),
        };
        train.gated_training = args.gated_training || file.gated_training.unwrap_or(false);
        train.jobs = args.jobs.or(file.jobs).unwrap_or(1);
        if train.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }

        let lowercase = !args.no_lowercase && file.lowercase.unwrap_or(true);
        let defaults = PreprocessConfig::default();
        let stopwords = match args.stopwords.as_ref().or(file.stopwords.as_ref()) {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                parse_stopwords(&text)
            }
            None => defaults.stopwords().clone(),
        };
        let rules = match args.lemma_rules.as_ref().or(file.lemma_rules.as_ref()) {
            Some(path) => LemmaRules::load(path)?,
            None => defaults.lemma_rules.clone(),
        };

        Ok(TrainSettings {
            seed,
            split,
            train,
            preprocess: PreprocessConfig::new(stopwords, rules, lowercase),
        })
    }
}
